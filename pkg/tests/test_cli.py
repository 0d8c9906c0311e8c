import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from chemofront.cli import SERIES_COLUMNS, main

SHORT_LOGISTIC = """
problem = "half_line"
[params]
chi1 = 0.3
mu1 = 1.0
[initial]
kind = "constant"
value = 1.0
[grid]
n_cells = 100
x_max = 10.0
[step]
t_end = 2.0
[probes]
interval = 0.5
"""

SHORT_FRONT = """
problem = "free_boundary_single"
[params]
chi1 = 0.3
[initial]
kind = "cosine_bump"
[grid]
n_cells = 80
[free_boundary]
h0 = 2.0
[step]
t_end = 1.0
[probes]
interval = 0.1
"""


@pytest.fixture
def write_config(tmp_path):
    def _write(text, name="run.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_run_writes_series_and_report(write_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", write_config(SHORT_LOGISTIC), "--out", str(out), "--quiet"]) == 0
    header, data = read_csv(out / "series.csv")
    assert header == [c for c in SERIES_COLUMNS if c in header]
    assert header[:3] == ["t", "sup_u", "inf_u"] and "err_to_target" in header
    np.testing.assert_allclose(data[:, 1], 1.0, atol=1e-8)
    report = json.loads((out / "report.json").read_text())
    assert report["H1"] is True and report["meta"]["steps"] > 0


def test_run_is_byte_deterministic(write_config, tmp_path):
    cfg = write_config(SHORT_LOGISTIC)
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d), "--quiet"]) == 0
    for name in ("series.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_free_boundary_run(write_config, tmp_path):
    out = tmp_path / "fb"
    assert main(["run", "--config", write_config(SHORT_FRONT), "--out", str(out), "--quiet"]) == 0
    header, data = read_csv(out / "series.csv")
    assert "h" in header and "ux_front" in header
    h = data[:, header.index("h")]
    assert np.all(np.diff(h) >= 0.0)
    assert json.loads((out / "report.json").read_text())["outcome"] in ("spreading", "vanishing", "undecided")


def test_check_hypotheses_reduced(write_config, capsys):
    assert main(["check-hypotheses", "--config", write_config(SHORT_LOGISTIC)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["M"] == 0.0 and set(report["reduced"].values()) == {True}


def test_bad_key_exit_code(write_config, capsys):
    assert main(["run", "--config", write_config("[grid]\ncells = 2\n"), "--quiet"]) == 2
    assert "line 2" in capsys.readouterr().err


def test_missing_config_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == 2


def test_numerical_failure_exit_code(write_config):
    text = SHORT_LOGISTIC.replace("t_end = 2.0", "t_end = 2.0\nscheme = \"explicit\"\ndt = 1.0")
    assert main(["run", "--config", write_config(text), "--quiet"]) == 3


def test_verify_from_config(request, tmp_path):
    cfg = str(request.config.rootpath / "configs" / "pure_logistic.toml")
    assert main(["verify", "global-bound", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    assert json.loads((tmp_path / "report.json").read_text())["passed"] is True


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "chemofront.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "verify" in out.stdout
