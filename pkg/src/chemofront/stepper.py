"""Time stepping of the density equation on a fixed grid.

The chemotactic term is written as transport ``u_t + (c u)_x`` with velocity
``c = chi1 v1_x - chi2 v2_x`` evaluated on cell faces and upwinded, so the
update is conservative and positivity preserving under the advective CFL
bound. Diffusion is either implicit (``imex``) or explicit.

Two reaction treatments are available: ``"euler"`` adds ``dt u (a - b u)``
with the coefficients frozen at the step start; ``"rk4"`` wraps the
transport step between two half steps of classical RK4 on the pointwise
logistic ODE (Strang splitting). With x-independent data the transport step
is the identity and the scheme reduces to RK4 on the logistic ODE.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import kernels
from .elliptic import face_gradient, solve_chemical
from .errors import BlowupDetected, CFLViolation, NumericalFailure
from .grid import Grid, StateField
from .params import BoundSet, CoefficientField, ModelParams

log = logging.getLogger(__name__)

SCHEMES = ("imex", "explicit")
REACTIONS = ("rk4", "euler")


@dataclass
class StepConfig:
    t_end: float = 10.0
    dt: Optional[float] = None
    scheme: str = "imex"
    cfl_safety: float = 0.45
    clip_negative: bool = True
    reaction: str = "rk4"
    blowup_factor: float = 1e3
    blowup_ceiling: Optional[float] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.reaction not in REACTIONS:
            raise ValueError(f"reaction must be one of {REACTIONS}, got {self.reaction!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("dt must be positive")


def cfl_limit(dx: float, vmax: float, cfg: StepConfig) -> float:
    """Largest admissible step for spacing ``dx`` and peak transport speed ``vmax``."""
    adv = cfg.cfl_safety * dx / max(1.0, vmax)
    if cfg.scheme == "explicit":
        return min(cfg.cfl_safety * dx * dx / 2.0, adv)
    return adv


def diffusion_system(n: int, r: float, left_dirichlet: bool = False, right_dirichlet: bool = False):
    """Diagonals of ``I - r * D`` with ``D`` the 3-point Laplacian (times dx^2).

    Neumann ends use the reflected ghost node; Dirichlet ends pin the node.
    """
    diag = np.full(n, 1.0 + 2.0 * r)
    lower = np.full(n, -r)
    upper = np.full(n, -r)
    lower[0] = 0.0
    upper[-1] = 0.0
    if left_dirichlet:
        diag[0], upper[0] = 1.0, 0.0
    else:
        upper[0] = -2.0 * r
    if right_dirichlet:
        diag[-1], lower[-1] = 1.0, 0.0
    else:
        lower[-1] = -2.0 * r
    return lower, diag, upper


def laplacian(u: np.ndarray, h: float, left_dirichlet: bool = False, right_dirichlet: bool = False) -> np.ndarray:
    out = np.empty_like(u)
    out[1:-1] = u[:-2] - 2.0 * u[1:-1] + u[2:]
    out[0] = 0.0 if left_dirichlet else 2.0 * (u[1] - u[0])
    out[-1] = 0.0 if right_dirichlet else 2.0 * (u[-2] - u[-1])
    return out / (h * h)


def logistic_rk4_nodes(u, t, dt, x, coeffs: CoefficientField) -> np.ndarray:
    """One classical RK4 step of ``u' = u (a(t, x) - b(t, x) u)`` at every node."""
    a0, am, a1 = coeffs.a(t, x), coeffs.a(t + 0.5 * dt, x), coeffs.a(t + dt, x)
    b0, bm, b1 = coeffs.b(t, x), coeffs.b(t + 0.5 * dt, x), coeffs.b(t + dt, x)
    k1 = (a0 - b0 * u) * u
    y = u + 0.5 * dt * k1
    k2 = (am - bm * y) * y
    y = u + 0.5 * dt * k2
    k3 = (am - bm * y) * y
    y = u + dt * k3
    k4 = (a1 - b1 * y) * y
    return u + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def transport_velocity(grid: Grid, v1, v2, p: ModelParams, length: float = 1.0) -> np.ndarray:
    """Face velocity ``chi1 v1_x - chi2 v2_x`` (physical units)."""
    return p.chi1 * face_gradient(grid, v1, length=length) - p.chi2 * face_gradient(grid, v2, length=length)


def solve_chemicals(grid: Grid, u, p: ModelParams, length: float = 1.0):
    return (
        solve_chemical(grid, u, p.lambda1, p.mu1, length=length),
        solve_chemical(grid, u, p.lambda2, p.mu2, length=length),
    )


def _clip(u: np.ndarray, volumes: np.ndarray, enabled: bool) -> float:
    neg = u < 0.0
    if not neg.any():
        return 0.0
    mass = float(-np.dot(volumes[neg], u[neg]))
    if enabled:
        u[neg] = 0.0
    return mass


def _transport(grid, u, p, dt, scheme, v1=None, v2=None):
    """Upwind chemotactic transport plus diffusion over ``dt``."""
    if v1 is None:
        v1, v2 = solve_chemicals(grid, u, p)
    vel = transport_velocity(grid, v1, v2, p)
    div = kernels.upwind_divergence(u, vel, 1.0 / grid.volumes)
    rhs = u - dt * div
    if scheme == "imex":
        return kernels.solve_tridiagonal(*diffusion_system(grid.n_nodes, dt / grid.dx**2), rhs)
    return rhs + dt * laplacian(u, grid.dx)


def admissible_dt(grid: Grid, state: StateField, p: ModelParams, cfg: StepConfig) -> float:
    vmax = float(np.max(np.abs(transport_velocity(grid, state.v1, state.v2, p)), initial=0.0))
    return cfl_limit(grid.dx, vmax, cfg)


def advance(grid: Grid, state: StateField, coeffs: CoefficientField, p: ModelParams, cfg: StepConfig, dt: float):
    """Advance one step of size ``dt``; returns ``(new_state, clipped_mass)``.

    Raises :class:`CFLViolation` if ``dt`` exceeds the admissible step for the
    current chemical gradients and :class:`BlowupDetected` if the density
    exceeds ``cfg.blowup_ceiling``.
    """
    limit = admissible_dt(grid, state, p, cfg)
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.3e} exceeds the admissible step {limit:.3e}", state.t)
    t, x, u = state.t, grid.x, state.u
    if cfg.reaction == "euler":
        rhs_u = u + dt * u * (coeffs.a(t, x) - coeffs.b(t, x) * u)
        # transport acts on u^n; reaction is added explicitly on top
        u_new = _transport(grid, u, p, dt, cfg.scheme, state.v1, state.v2) + (rhs_u - u)
    else:
        u_half = logistic_rk4_nodes(u, t, 0.5 * dt, x, coeffs)
        u_half = _transport(grid, u_half, p, dt, cfg.scheme)
        u_new = logistic_rk4_nodes(u_half, t + 0.5 * dt, 0.5 * dt, x, coeffs)
    clipped = _clip(u_new, grid.volumes, cfg.clip_negative)
    if clipped > 0.0:
        log.debug("t=%.6g: clipped negative mass %.3e", t + dt, clipped)
    if not np.all(np.isfinite(u_new)):
        raise BlowupDetected("non-finite density", t + dt)
    if cfg.blowup_ceiling is not None and float(u_new.max()) > cfg.blowup_ceiling:
        raise BlowupDetected(f"max u = {u_new.max():.6g} exceeds ceiling {cfg.blowup_ceiling:.6g}", t + dt)
    v1, v2 = solve_chemicals(grid, u_new, p)
    return StateField(t + dt, u_new, v1, v2), clipped


def step(grid: Grid, state: StateField, coeffs: CoefficientField, p: ModelParams, cfg: StepConfig,
         dt: Optional[float] = None) -> StateField:
    """Advance ``state`` by one step (``dt`` defaults to ``cfg.dt`` or the CFL step)."""
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else admissible_dt(grid, state, p, cfg)
    return advance(grid, state, coeffs, p, cfg, dt)[0]


def initial_state(grid: Grid, u0, p: ModelParams, t0: float = 0.0, length: float = 1.0) -> StateField:
    u0 = np.array(u0, dtype=np.float64)
    if u0.shape != (grid.n_nodes,):
        raise ValueError(f"initial datum has shape {u0.shape}, grid has {grid.n_nodes} nodes")
    if np.any(u0 < 0.0):
        raise ValueError("initial datum must be nonnegative")
    v1, v2 = solve_chemicals(grid, u0, p, length)
    return StateField(float(t0), u0, v1, v2)


Target = Callable[[float, np.ndarray], np.ndarray]
ProbeSpec = Union[None, float, Sequence[float]]


@dataclass
class TimeSeries:
    """Probe records of one run plus run-level metadata.

    ``columns`` maps column name to a list of values, one per probe time.
    ``meta`` holds whole-run statistics that are tracked at every step
    (running maximum of ``sup u``, cumulative clipped mass, step count).
    """

    columns: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    final: Optional[object] = None

    def append(self, **row):
        for k, v in row.items():
            self.columns.setdefault(k, []).append(float(v))

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name], dtype=np.float64)

    @property
    def t(self) -> np.ndarray:
        return self.array("t")

    def __len__(self):
        return len(self.columns.get("t", ()))


def probe_times(t0: float, t_end: float, probes: ProbeSpec) -> Optional[np.ndarray]:
    """Resolve a probe spec to explicit times; ``None`` means record every step."""
    if probes is None:
        return None
    if isinstance(probes, (int, float)):
        if not probes > 0:
            raise ValueError("probe interval must be positive")
        n = int(math.floor((t_end - t0) / probes + 1e-9))
        times = t0 + probes * np.arange(n + 1)
        if t_end - times[-1] > 1e-9 * max(1.0, abs(t_end)):
            times = np.append(times, t_end)
        return times
    times = np.unique(np.asarray(probes, dtype=np.float64))
    return times[(times >= t0) & (times <= t_end)]


def default_ceiling(bounds: Optional[BoundSet], u0_sup: float, coeffs: CoefficientField, factor: float) -> float:
    if bounds is not None and bounds.C_u0 is not None:
        return factor * bounds.C_u0
    return factor * max(u0_sup, coeffs.a_sup / coeffs.b_inf if coeffs.b_inf > 0 else 1.0, 1e-12)


def run(grid: Grid, u0, coeffs: CoefficientField, p: ModelParams, cfg: StepConfig,
        probes: ProbeSpec = None, *, t0: float = 0.0, target: Optional[Target] = None,
        bounds: Optional[BoundSet] = None) -> TimeSeries:
    """Integrate from ``t0`` to ``cfg.t_end`` and record probe statistics.

    Steps are shortened to land exactly on probe times and on ``t_end``.
    """
    if not cfg.t_end > t0:
        raise ValueError("t_end must exceed t0")
    state = initial_state(grid, u0, p, t0)
    if cfg.blowup_ceiling is None:
        cfg = StepConfig(**{**cfg.__dict__, "blowup_ceiling": default_ceiling(
            bounds, float(state.u.max()), coeffs, cfg.blowup_factor)})
    times = probe_times(t0, cfg.t_end, probes)
    ts = TimeSeries()
    mass0 = grid.integrate(state.u)
    ts.meta.update(backend=kernels.BACKEND, u0_sup=float(state.u.max()), u0_inf=float(state.u.min()),
                   initial_mass=mass0, t0=t0, t_end=cfg.t_end)
    clip_total = 0.0
    sup_max, t_sup_max = float(state.u.max()), t0
    n_steps = 0

    def record(s):
        row = dict(t=s.t, sup_u=s.u.max(), inf_u=s.u.min(), mass=grid.integrate(s.u), clip_mass=clip_total)
        if target is not None:
            row["err_to_target"] = np.max(np.abs(s.u - target(s.t, grid.x)))
        ts.append(**row)

    next_probe = 0
    if times is None or (len(times) and abs(times[0] - t0) < 1e-12):
        record(state)
        next_probe = 1
    eps = 1e-12 * max(1.0, abs(cfg.t_end))
    while state.t < cfg.t_end - eps:
        dt = cfg.dt if cfg.dt is not None else admissible_dt(grid, state, p, cfg)
        stop = cfg.t_end
        if times is not None and next_probe < len(times):
            stop = min(stop, times[next_probe])
        if state.t + dt > stop - eps:
            dt = stop - state.t
        try:
            state, clipped = advance(grid, state, coeffs, p, cfg, dt)
        except NumericalFailure as exc:
            exc.time = state.t if exc.time is None else exc.time
            raise
        n_steps += 1
        clip_total += clipped
        if state.u.max() > sup_max:
            sup_max, t_sup_max = float(state.u.max()), state.t
        if times is None:
            record(state)
        elif next_probe < len(times) and abs(state.t - times[next_probe]) <= eps:
            record(state)
            next_probe += 1
    ts.meta.update(sup_u_max=sup_max, t_sup_max=t_sup_max, clip_mass=clip_total, steps=n_steps)
    ts.final = state
    return ts
