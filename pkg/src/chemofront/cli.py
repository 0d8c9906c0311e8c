"""Command-line entry point: ``chemofront {check-hypotheses,run,verify,sweep}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 numerical failure (CFL, blow-up, front collapse).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

from . import kernels
from .config import RunConfig, load_config
from .errors import ConfigError, NumericalFailure
from .free_boundary import detect_outcome
from .harness import to_jsonable
from .scenarios import (
    SUITES,
    builtin_scenarios,
    execute,
    orbit_for,
    prepare,
    reduced_hypotheses,
    run_suite,
    scenarios_from_config,
    worker_count,
)
from .stepper import TimeSeries

log = logging.getLogger("chemofront")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
SERIES_COLUMNS = ("t", "sup_u", "inf_u", "err_to_target", "h", "g", "ux_front", "clip_mass")


# ---------------------------------------------------------------- serialisation


def series_text(ts: TimeSeries) -> str:
    cols = [c for c in SERIES_COLUMNS if c in ts.columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    data = [ts.columns[c] for c in cols]
    for row in zip(*data):
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def report_text(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_series(ts: TimeSeries, path) -> None:
    """Write probe records as CSV (columns in a fixed order, absent ones omitted)."""
    _write(path, series_text(ts))


def emit_report(report: dict, path) -> None:
    """Write a JSON report with sorted keys."""
    _write(path, report_text(report))


# ---------------------------------------------------------------- subcommands


def _out_path(cfg: RunConfig, out: Optional[str], name: str) -> Path:
    base = Path(out) if out else Path(cfg.output.dir)
    return base / name


def _hypothesis_report(cfg: RunConfig) -> dict:
    prep = prepare(cfg)
    out = {"params": cfg.params.as_dict(), "coefficients": {
        "a_inf": prep.coeffs.a_inf, "a_sup": prep.coeffs.a_sup, "b_inf": prep.coeffs.b_inf,
        "b_sup": prep.coeffs.b_sup, "period_T": prep.coeffs.period_T}}
    out.update(prep.hypotheses.to_dict())
    out.update(prep.bounds.to_dict())
    p = cfg.params
    if p.chi2 == 0.0 and p.lambda2 == p.lambda1 and prep.coeffs.a_inf > 0.0:
        h1, h2, h3 = reduced_hypotheses(p, prep.coeffs)
        out["reduced"] = {"b_inf > chi1 mu1": h1, "b_inf > (1 + a_sup/a_inf) chi1 mu1": h2,
                          "b_inf > 2 chi1 mu1": h3}
    return out


def cmd_check_hypotheses(args, cfg: RunConfig) -> int:
    report = _hypothesis_report(cfg)
    text = report_text(report)
    if args.out:
        emit_report(report, _out_path(cfg, args.out, cfg.output.report))
    if not args.quiet:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args, cfg: RunConfig) -> int:
    prep = prepare(cfg)
    target = None if cfg.is_free_boundary else orbit_for(prep)
    ts = execute(prep, target=target)
    report = {"problem": cfg.problem, "seed": cfg.seed, "meta": ts.meta}
    report.update(_hypothesis_report(cfg))
    if cfg.is_free_boundary:
        fb = cfg.free_boundary
        report["outcome"] = detect_outcome(ts, fb.h0, prep.bounds.m0, spread_factor=fb.spread_factor,
                                           vanish_sup=fb.vanish_sup, plateau_rate=fb.plateau_rate)
    emit_series(ts, _out_path(cfg, args.out, cfg.output.series))
    emit_report(report, _out_path(cfg, args.out, cfg.output.report))
    log.info("run finished: %d steps, sup u = %.6g", ts.meta["steps"], ts.array("sup_u")[-1])
    return EXIT_OK


def cmd_verify(args, cfg: Optional[RunConfig]) -> int:
    if cfg is None:
        scenarios = builtin_scenarios(args.suite, seed=args.seed or 0)
        if args.tol is not None:
            scenarios = [replace(sc, config=replace(sc.config, checks=replace(sc.config.checks, tol=args.tol)))
                         for sc in scenarios]
    else:
        scenarios = scenarios_from_config(args.suite, cfg)
    report = run_suite(scenarios)
    report["suite"] = args.suite
    if args.out or cfg is not None:
        base = Path(args.out) if args.out else Path(cfg.output.dir)
        name = cfg.output.report if cfg is not None else f"verify-{args.suite}.json"
        emit_report(report, base / name)
    if not args.quiet:
        for sc in report["scenarios"]:
            print(f"{sc['status'].upper():9s} {sc['suite']}/{sc['name']}")
        print(f"{args.suite}: {report['counts']}")
    if report["counts"]["error"]:
        return EXIT_NUMERIC
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _sweep_point(job):
    cfg, out = job
    prep = prepare(cfg)
    amp = getattr(cfg.initial, "amplitude", None)
    row = {"h0": cfg.free_boundary.h0, "amplitude": amp}
    try:
        ts = execute(prep)
    except NumericalFailure as exc:
        row.update(outcome="failed", error=type(exc).__name__, h_final=float("nan"), sup_u_final=float("nan"))
        return row
    fb = cfg.free_boundary
    row.update(outcome=detect_outcome(ts, fb.h0, prep.bounds.m0, spread_factor=fb.spread_factor,
                                      vanish_sup=fb.vanish_sup, plateau_rate=fb.plateau_rate),
               h_final=float(ts.array("h")[-1]), sup_u_final=float(ts.array("sup_u")[-1]))
    if out is not None:
        emit_series(ts, Path(out) / "sweep" / f"h0_{fb.h0!r}_amp_{amp!r}.csv")
    return row


def cmd_sweep(args, cfg: RunConfig) -> int:
    if not cfg.is_free_boundary:
        raise ConfigError("sweep needs a free_boundary_single or free_boundary_double problem")
    if not hasattr(cfg.initial, "amplitude"):
        raise ConfigError("sweep needs an initial datum with an amplitude (gaussian or cosine_bump)")
    out = args.out or cfg.output.dir
    jobs = []
    for h0 in cfg.sweep.h0:
        for amp in cfg.sweep.amplitude:
            c = replace(cfg, free_boundary=replace(cfg.free_boundary, h0=float(h0)),
                        initial=replace(cfg.initial, amplitude=float(amp)))
            jobs.append((c, out))
    workers = worker_count(len(jobs))
    if workers == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["h0", "amplitude", "outcome", "h_final", "sup_u_final"])
    for r in rows:
        writer.writerow([repr(r["h0"]), repr(r["amplitude"]), r["outcome"], repr(r["h_final"]),
                         repr(r["sup_u_final"])])
    _write(Path(out) / "phase_table.csv", buf.getvalue())
    if not args.quiet:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--seed", type=int, metavar="N", help="seed for randomized suites")
    common.add_argument("--tol", type=float, metavar="X", help="relative tolerance for bound checks")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(prog="chemofront", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check-hypotheses", parents=[common], help="print hypothesis constants and bounds")
    sub.add_parser("run", parents=[common], help="run one simulation")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    sub.add_parser("sweep", parents=[common], help="free-boundary outcome table over (h0, amplitude)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        cfg = None
        if args.config:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            if args.tol is not None:
                cfg = replace(cfg, checks=replace(cfg.checks, tol=args.tol))
        elif args.command != "verify":
            parser.error(f"{args.command} needs --config PATH")
        handler = {"check-hypotheses": cmd_check_hypotheses, "run": cmd_run, "sweep": cmd_sweep}
        if args.command == "verify":
            return cmd_verify(args, cfg)
        return handler[args.command](args, cfg)
    except ConfigError as exc:
        print(f"chemofront: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        where = f" at t = {exc.time:.6g}" if exc.time is not None else ""
        print(f"chemofront: numerical failure ({type(exc).__name__}){where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"chemofront: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
