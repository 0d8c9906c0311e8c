"""Run configuration: TOML documents with flat sections, validated strictly.

A minimal document::

    problem = "half_line"

    [params]
    chi1 = 0.0

    [a]
    kind = "constant"
    value = 1.0

Everything not given takes the documented default; every key that is not
recognised is an error reported with its line number.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib
import tomli_w

from .errors import ConfigError
from .params import CoefficientField, ModelParams
from .stepper import REACTIONS, SCHEMES, StepConfig

PROBLEMS = ("half_line", "whole_line", "free_boundary_single", "free_boundary_double")
T_SAMPLES_PER_PERIOD = 400


# ---------------------------------------------------------------- function families


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    def __call__(self, t, x):
        return np.full(np.shape(x), self.value, dtype=np.float64)


@dataclass(frozen=True)
class SinusoidalT:
    """``mean + amplitude sin(2 pi t / period + phase)``."""

    mean: float = 1.0
    amplitude: float = 0.0
    period: float = 1.0
    phase: float = 0.0

    def __call__(self, t, x):
        val = self.mean + self.amplitude * math.sin(2.0 * math.pi * t / self.period + self.phase)
        return np.full(np.shape(x), val, dtype=np.float64)


@dataclass(frozen=True)
class GaussianBumpX:
    """``base + bump exp(-(x - center)^2 / (2 width^2))``."""

    base: float = 1.0
    bump: float = 0.0
    center: float = 0.0
    width: float = 1.0

    def __call__(self, t, x):
        x = np.asarray(x, dtype=np.float64)
        return self.base + self.bump * np.exp(-((x - self.center) ** 2) / (2.0 * self.width**2))


@dataclass(frozen=True)
class Product:
    """Sinusoidal-in-t factor times Gaussian-bump-in-x factor."""

    mean: float = 1.0
    amplitude: float = 0.0
    period: float = 1.0
    phase: float = 0.0
    base: float = 1.0
    bump: float = 0.0
    center: float = 0.0
    width: float = 1.0

    def __call__(self, t, x):
        s = SinusoidalT(self.mean, self.amplitude, self.period, self.phase)(t, x)
        return s * GaussianBumpX(self.base, self.bump, self.center, self.width)(t, x)


COEFFICIENT_KINDS = {
    "constant": Constant,
    "sinusoidal_t": SinusoidalT,
    "gaussian_bump_x": GaussianBumpX,
    "product": Product,
}


@dataclass(frozen=True)
class ConstantDatum:
    value: float = 1.0

    def __call__(self, x):
        return np.full(np.shape(x), self.value, dtype=np.float64)


@dataclass(frozen=True)
class GaussianDatum:
    """``base + amplitude exp(-(x - center)^2 / (2 width^2))``."""

    base: float = 0.0
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.base + self.amplitude * np.exp(-((x - self.center) ** 2) / (2.0 * self.width**2))


@dataclass(frozen=True)
class CosineBump:
    """``base + amplitude cos(pi (x - center) / (2 half_width))`` on ``|x - center| < half_width``, ``base`` outside.

    ``half_width = 0`` means "use the free-boundary ``h0``" (the bump then
    vanishes at the initial front when ``base = 0``).
    """

    amplitude: float = 1.0
    half_width: float = 0.0
    center: float = 0.0
    base: float = 0.0

    def __call__(self, x, half_width: Optional[float] = None):
        hw = half_width if self.half_width == 0.0 and half_width is not None else self.half_width
        if not hw > 0.0:
            raise ConfigError("cosine_bump needs a positive half_width (or a free-boundary h0)")
        x = np.asarray(x, dtype=np.float64)
        r = np.abs(x - self.center)
        inside = np.cos(np.pi * np.minimum(r, hw) / (2.0 * hw))
        return self.base + self.amplitude * np.where(r < hw, inside, 0.0)


@dataclass(frozen=True)
class Piecewise:
    """Linear interpolation through ``(points, values)``, constant beyond the ends."""

    points: tuple = (0.0, 1.0)
    values: tuple = (1.0, 1.0)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=np.float64), self.points, self.values)


INITIAL_KINDS = {
    "constant": ConstantDatum,
    "gaussian": GaussianDatum,
    "cosine_bump": CosineBump,
    "piecewise": Piecewise,
}


# ---------------------------------------------------------------- config sections


@dataclass
class GridSpec:
    n_cells: int = 400
    x_max: float = 40.0


@dataclass
class ProbeSpec:
    interval: Optional[float] = 0.1
    times: Optional[list] = None
    every_step: bool = False

    def resolve(self):
        if self.every_step:
            return None
        if self.times is not None:
            return list(self.times)
        return self.interval


@dataclass
class FreeBoundarySpec:
    h0: float = 2.0
    g0: Optional[float] = None
    spread_factor: float = 10.0
    vanish_sup: float = 1e-4
    plateau_rate: float = 1e-6
    collapse_factor: float = 4.0


@dataclass
class CheckSpec:
    tol: float = 1e-2
    abs_tol: float = 1e-4
    slack: float = 0.1
    burn_in: int = 2
    floor: float = 1e-6
    final_fraction: float = 0.1
    min_margin: float = 1e-6


@dataclass
class OutputSpec:
    dir: str = "out"
    series: str = "series.csv"
    report: str = "report.json"


@dataclass
class SweepSpec:
    h0: list = field(default_factory=lambda: [0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
    amplitude: list = field(default_factory=lambda: [0.01, 0.1, 1.0])


@dataclass
class RunConfig:
    problem: str = "half_line"
    t0: float = 0.0
    seed: int = 0
    params: ModelParams = field(default_factory=lambda: ModelParams(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0))
    a: object = field(default_factory=Constant)
    b: object = field(default_factory=Constant)
    initial: object = field(default_factory=ConstantDatum)
    grid: GridSpec = field(default_factory=GridSpec)
    step: StepConfig = field(default_factory=StepConfig)
    probes: ProbeSpec = field(default_factory=ProbeSpec)
    free_boundary: FreeBoundarySpec = field(default_factory=FreeBoundarySpec)
    checks: CheckSpec = field(default_factory=CheckSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)

    @property
    def is_free_boundary(self) -> bool:
        return self.problem.startswith("free_boundary")

    @property
    def g0(self) -> Optional[float]:
        if self.problem != "free_boundary_double":
            return None
        fb = self.free_boundary
        return -fb.h0 if fb.g0 is None else fb.g0

    def to_dict(self) -> dict:
        """Plain nested dict, ``None`` entries dropped (TOML has no null)."""
        out = {"problem": self.problem, "t0": self.t0, "seed": self.seed, "params": self.params.as_dict()}
        for name, fam in (("a", COEFFICIENT_KINDS), ("b", COEFFICIENT_KINDS), ("initial", INITIAL_KINDS)):
            obj = getattr(self, name)
            kind = next(k for k, cls in fam.items() if type(obj) is cls)
            body = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(obj).items()}
            out[name] = {"kind": kind, **body}
        for name in ("grid", "step", "probes", "free_boundary", "checks", "output", "sweep"):
            body = asdict(getattr(self, name)) if name != "step" else dict(self.step.__dict__)
            out[name] = {k: v for k, v in body.items() if v is not None}
        return out


# ---------------------------------------------------------------- parsing

_SECTION_TYPES = {
    "grid": GridSpec,
    "probes": ProbeSpec,
    "free_boundary": FreeBoundarySpec,
    "checks": CheckSpec,
    "output": OutputSpec,
    "sweep": SweepSpec,
}
_TOP_KEYS = {"problem", "t0", "seed", "params", "a", "b", "initial", "step", *_SECTION_TYPES}
_PARAM_KEYS = ("chi1", "chi2", "lambda1", "lambda2", "mu1", "mu2", "nu")
_STEP_KEYS = ("t_end", "dt", "scheme", "cfl_safety", "clip_negative", "reaction", "blowup_factor", "blowup_ceiling")


def _line_of(text: str, section: Optional[str], key: str) -> Optional[int]:
    """1-based line where ``key`` is assigned inside ``[section]`` (top level when ``None``)."""
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        head = re.match(r"\s*\[\s*([A-Za-z0-9_.\-]+)\s*\]", line)
        if head:
            current = head.group(1)
            if section is None and current == key:
                return i
            continue
        if current == section and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return i
    return None


class _Validator:
    def __init__(self, text: str):
        self.text = text

    def fail(self, section: Optional[str], key: str, msg: str):
        line = _line_of(self.text, section, key)
        where = f"line {line}: " if line else ""
        path = f"[{section}] {key}" if section else key
        raise ConfigError(f"{where}{path}: {msg}")

    def table(self, doc: dict, section: str) -> dict:
        value = doc.get(section, {})
        if not isinstance(value, dict):
            self.fail(None, section, "expected a table")
        return value

    def unknown(self, section: Optional[str], body: dict, allowed):
        for key in body:
            if key not in allowed:
                self.fail(section, key, f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})")

    def number(self, section, key, value, *, integer=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(section, key, f"expected a number, got {value!r}")
        if integer:
            if int(value) != value:
                self.fail(section, key, f"expected an integer, got {value!r}")
            return int(value)
        return float(value)

    def build(self, section, cls, body, skip=()):
        """Instantiate a dataclass from ``body``, coercing types from the defaults."""
        defaults = cls()
        allowed = {f for f in defaults.__dataclass_fields__} - set(skip)
        self.unknown(section, body, allowed)
        kwargs = {}
        for key, value in body.items():
            ref = getattr(defaults, key)
            if isinstance(ref, bool):
                if not isinstance(value, bool):
                    self.fail(section, key, f"expected true/false, got {value!r}")
                kwargs[key] = value
            elif isinstance(ref, str):
                if not isinstance(value, str):
                    self.fail(section, key, f"expected a string, got {value!r}")
                kwargs[key] = value
            elif isinstance(ref, (list, tuple)) or (ref is None and isinstance(value, list)):
                if not isinstance(value, list):
                    self.fail(section, key, f"expected a list, got {value!r}")
                items = [self.number(section, key, v) for v in value]
                kwargs[key] = tuple(items) if isinstance(ref, tuple) else items
            elif isinstance(ref, int) and not isinstance(ref, bool) and key in ("n_cells", "burn_in"):
                kwargs[key] = self.number(section, key, value, integer=True)
            else:
                kwargs[key] = self.number(section, key, value)
        try:
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            self.fail(section, next(iter(body), "kind"), str(exc))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    v = _Validator(text)
    v.unknown(None, doc, _TOP_KEYS)

    problem = doc.get("problem", "half_line")
    if problem not in PROBLEMS:
        v.fail(None, "problem", f"must be one of {PROBLEMS}, got {problem!r}")
    t0 = v.number(None, "t0", doc.get("t0", 0.0))
    seed = v.number(None, "seed", doc.get("seed", 0), integer=True)

    pbody = v.table(doc, "params")
    v.unknown("params", pbody, _PARAM_KEYS)
    pvals = {"chi1": 0.0, "chi2": 0.0, "lambda1": 1.0, "lambda2": 1.0, "mu1": 1.0, "mu2": 1.0, "nu": 1.0}
    for key, value in pbody.items():
        pvals[key] = v.number("params", key, value)
    try:
        params = ModelParams(**pvals)
    except ValueError as exc:
        v.fail("params", next(k for k in _PARAM_KEYS if k in str(exc)), str(exc))

    def family(section, kinds, default_kind):
        body = dict(v.table(doc, section))
        kind = body.pop("kind", default_kind)
        if kind not in kinds:
            v.fail(section, "kind", f"must be one of {tuple(kinds)}, got {kind!r}")
        return v.build(section, kinds[kind], body)

    a = family("a", COEFFICIENT_KINDS, "constant")
    b = family("b", COEFFICIENT_KINDS, "constant")
    fb_default = "cosine_bump" if str(problem).startswith("free_boundary") else "constant"
    initial = family("initial", INITIAL_KINDS, fb_default)
    if isinstance(initial, Piecewise) and len(initial.points) != len(initial.values):
        v.fail("initial", "values", "points and values must have the same length")

    sbody = v.table(doc, "step")
    v.unknown("step", sbody, _STEP_KEYS)
    skw = {}
    for key, value in sbody.items():
        if key in ("scheme", "reaction"):
            choices = SCHEMES if key == "scheme" else REACTIONS
            if value not in choices:
                v.fail("step", key, f"must be one of {choices}, got {value!r}")
            skw[key] = value
        elif key == "clip_negative":
            if not isinstance(value, bool):
                v.fail("step", key, f"expected true/false, got {value!r}")
            skw[key] = value
        else:
            skw[key] = v.number("step", key, value)
    try:
        step = StepConfig(**skw)
    except ValueError as exc:
        v.fail("step", next(iter(sbody), "t_end"), str(exc))
    if not step.t_end > t0:
        v.fail("step", "t_end", f"t_end = {step.t_end} must exceed t0 = {t0}")

    sections = {name: v.build(name, cls, v.table(doc, name)) for name, cls in _SECTION_TYPES.items()}
    grid = sections["grid"]
    if grid.n_cells < 8:
        v.fail("grid", "n_cells", "must be at least 8")
    if not grid.x_max > 0.0:
        v.fail("grid", "x_max", "must be positive")
    probes = sections["probes"]
    if probes.interval is not None and not probes.interval > 0.0:
        v.fail("probes", "interval", "must be positive")
    fb = sections["free_boundary"]
    if not fb.h0 > 0.0:
        v.fail("free_boundary", "h0", "must be positive")
    if fb.g0 is not None and not fb.g0 < fb.h0:
        v.fail("free_boundary", "g0", "must be below h0")
    return RunConfig(problem, t0, seed, params, a, b, initial, grid, step, probes, fb,
                     sections["checks"], sections["output"], sections["sweep"])


def dump_config(cfg: RunConfig) -> str:
    """Serialise to TOML; ``parse_config(dump_config(c)) == c``."""
    return tomli_w.dumps(cfg.to_dict())


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------- builders


def _period(fn) -> Optional[float]:
    return fn.period if isinstance(fn, (SinusoidalT, Product)) and fn.amplitude != 0.0 else None


def common_period(a, b) -> Optional[float]:
    """A period shared by ``a`` and ``b``; ``None`` when neither varies in time or none is found."""
    pa, pb = _period(a), _period(b)
    if pa is None or pb is None:
        return pa if pb is None else pb
    hi, lo = max(pa, pb), min(pa, pb)
    k = round(hi / lo)
    return hi if abs(hi - k * lo) <= 1e-12 * hi else None


def sample_x(cfg: RunConfig) -> np.ndarray:
    """Spatial lattice on which coefficient extrema are sampled."""
    n = cfg.grid.n_cells
    if cfg.problem in ("whole_line", "free_boundary_double"):
        return np.linspace(-cfg.grid.x_max, cfg.grid.x_max, 2 * n + 1)
    return np.linspace(0.0, cfg.grid.x_max, n + 1)


def build_coefficients(cfg: RunConfig) -> CoefficientField:
    T = common_period(cfg.a, cfg.b)
    varies_t = _period(cfg.a) is not None or _period(cfg.b) is not None
    if T is not None:
        t_samples = cfg.t0 + np.linspace(0.0, T, T_SAMPLES_PER_PERIOD, endpoint=False)
    elif varies_t:
        t_samples = np.linspace(cfg.t0, cfg.step.t_end, T_SAMPLES_PER_PERIOD * 4)
    else:
        t_samples = np.array([cfg.t0])
    x_indep = all(isinstance(f, (Constant, SinusoidalT)) or (isinstance(f, (GaussianBumpX, Product)) and f.bump == 0.0)
                  for f in (cfg.a, cfg.b))
    return CoefficientField.from_callables(cfg.a, cfg.b, t_samples, sample_x(cfg), T, x_indep)


def initial_values(cfg: RunConfig, x: np.ndarray) -> np.ndarray:
    if isinstance(cfg.initial, CosineBump):
        return cfg.initial(x, half_width=cfg.free_boundary.h0)
    return cfg.initial(x)
