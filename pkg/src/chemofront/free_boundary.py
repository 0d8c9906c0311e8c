"""Moving-front problems solved on a fixed reference interval.

With ``x = g + xi * L`` and ``L = h - g`` (``g = 0`` for a single front on
``[0, h(t)]``), the density ``w(t, xi) = u(t, x)`` obeys

    w_t = w_xixi / L^2 + ((1 - xi) g' + xi h') / L * w_xi
          - (1/L^2) (w (chi1 v1_xi - chi2 v2_xi))_xi + w (a - b w)

and the chemicals solve ``v_xixi / L^2 - lambda v + mu w = 0`` with zero flux at
both ends. Fronts follow ``h' = -nu u_x(t, h)`` and ``g' = -nu u_x(t, g)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import BlowupDetected, CFLViolation, FrontCollapse, NumericalFailure
from .grid import DIRICHLET, NEUMANN, Grid, make_grid
from .params import BoundSet, CoefficientField, ModelParams
from .stepper import (
    StepConfig,
    TimeSeries,
    default_ceiling,
    diffusion_system,
    logistic_rk4_nodes,
    probe_times,
    solve_chemicals,
    transport_velocity,
)

log = logging.getLogger(__name__)


def to_reference(x: np.ndarray, u: np.ndarray, h: float, xi: np.ndarray, g: float = 0.0) -> np.ndarray:
    """Sample ``u`` (given at physical nodes ``x``) at ``x = g + xi (h - g)``."""
    if not h - g > 0.0:
        raise ValueError(f"front positions must satisfy h > g, got h={h!r}, g={g!r}")
    return np.interp(g + xi * (h - g), x, u)


def from_reference(xi: np.ndarray, w: np.ndarray, h: float, x: Optional[np.ndarray] = None, g: float = 0.0):
    """Map reference data back to physical space.

    Without ``x`` returns ``(x_nodes, w)`` on the stretched nodes; with ``x``
    interpolates linearly onto those positions (zero outside ``[g, h]``).
    """
    if not h - g > 0.0:
        raise ValueError(f"front positions must satisfy h > g, got h={h!r}, g={g!r}")
    nodes = g + xi * (h - g)
    if x is None:
        return nodes, np.array(w, dtype=np.float64)
    return np.interp(x, nodes, w, left=0.0, right=0.0)


@dataclass
class FreeBoundaryState:
    t: float
    h: float
    w: np.ndarray
    v1w: np.ndarray
    v2w: np.ndarray
    g: Optional[float] = None
    h_history: list = field(default_factory=list)
    g_history: list = field(default_factory=list)

    @property
    def double(self) -> bool:
        return self.g is not None

    @property
    def left(self) -> float:
        return 0.0 if self.g is None else self.g

    @property
    def length(self) -> float:
        return self.h - self.left


def reference_grid(n_cells: int, double: bool) -> Grid:
    return make_grid("reference_unit", n_cells=n_cells, left_bc=DIRICHLET if double else NEUMANN, right_bc=DIRICHLET)


def front_slopes(w: np.ndarray, dxi: float, length: float, double: bool):
    """Second-order one-sided ``u_x`` at the right front (and left front when ``double``)."""
    right = (3.0 * w[-1] - 4.0 * w[-2] + w[-3]) / (2.0 * dxi * length)
    left = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dxi * length) if double else None
    return right, left


def front_speeds(w, dxi, length, double, nu):
    """``(g', h')`` from the Stefan law.

    Speeds are clipped to the sign the law implies for nonnegative data
    (``h' >= 0``, ``g' <= 0``); a wrong-signed one-sided slope only occurs
    for under-resolved profiles.
    """
    ux_r, ux_l = front_slopes(w, dxi, length, double)
    hdot = max(0.0, -nu * ux_r)
    gdot = min(0.0, -nu * ux_l) if double else 0.0
    return gdot, hdot, ux_r, ux_l


def initial_fb_state(n_cells: int, u0_ref: np.ndarray, h0: float, p: ModelParams, t0: float = 0.0,
                     g0: Optional[float] = None) -> FreeBoundaryState:
    """Build the starting state from reference-grid samples of ``u0``.

    Data that do not vanish at a front are projected by zeroing the front node.
    """
    double = g0 is not None
    grid = reference_grid(n_cells, double)
    w = np.array(u0_ref, dtype=np.float64)
    if w.shape != (grid.n_nodes,):
        raise ValueError(f"initial datum has shape {w.shape}, reference grid has {grid.n_nodes} nodes")
    if np.any(w < 0.0):
        raise ValueError("initial datum must be nonnegative")
    ends = [-1, 0] if double else [-1]
    scale = max(float(w.max()), 1.0)
    if any(abs(w[i]) > 1e-12 * scale for i in ends):
        log.warning("initial datum does not vanish at the front; projecting front value(s) to 0")
    w[ends] = 0.0
    length = h0 - (g0 or 0.0)
    if not length > 0.0:
        raise ValueError("need h0 > g0 (and h0 > 0)")
    v1, v2 = solve_chemicals(grid, w, p, length)
    return FreeBoundaryState(float(t0), float(h0), w, v1, v2, None if g0 is None else float(g0), [float(h0)],
                             [] if g0 is None else [float(g0)])


def fb_admissible_dt(grid: Grid, state: FreeBoundaryState, p: ModelParams, cfg: StepConfig) -> float:
    """CFL step in reference units: transport includes the mesh velocity."""
    L = state.length
    gdot, hdot, _, _ = front_speeds(state.w, grid.dx, L, state.double, p.nu)
    chem = np.max(np.abs(transport_velocity(grid, state.v1w, state.v2w, p, length=L)), initial=0.0)
    mesh = max(abs(gdot), abs(hdot))
    vmax = chem + mesh
    dx_phys = grid.dx * L
    adv = cfg.cfl_safety * dx_phys / max(1.0, vmax)
    if cfg.scheme == "explicit":
        return min(adv, cfg.cfl_safety * dx_phys**2 / 2.0)
    return adv


def _physical_x(grid: Grid, state: FreeBoundaryState) -> np.ndarray:
    return state.left + grid.x * state.length


def stefan_step(grid: Grid, state: FreeBoundaryState, coeffs: CoefficientField, p: ModelParams,
                cfg: StepConfig, dt: Optional[float] = None, h0: Optional[float] = None,
                collapse_factor: float = 4.0):
    """Advance the front(s) and the density by one step.

    Returns ``(new_state, clipped_mass, ux_front)``. The front moves by
    forward Euler on the Stefan law evaluated from the current profile; the
    density is then advanced on the reference grid with the mesh velocity of
    that same front motion.
    """
    limit = fb_admissible_dt(grid, state, p, cfg)
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else limit
    if dt > limit * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.3e} exceeds the admissible step {limit:.3e}", state.t)

    double = state.double
    dxi = grid.dx
    L = state.length
    gdot, hdot, ux_r, _ = front_speeds(state.w, dxi, L, double, p.nu)
    t = state.t
    w = state.w

    # first reaction half step (or the full explicit one) at the current geometry
    x_phys = _physical_x(grid, state)
    if cfg.reaction == "euler":
        react = dt * w * (coeffs.a(t, x_phys) - coeffs.b(t, x_phys) * w)
        w_mid = w
        v1, v2 = state.v1w, state.v2w
    else:
        w_mid = logistic_rk4_nodes(w, t, 0.5 * dt, x_phys, coeffs)
        w_mid[-1] = 0.0
        if double:
            w_mid[0] = 0.0
        v1, v2 = solve_chemicals(grid, w_mid, p, L)
        react = 0.0

    # chemotactic transport in reference units: face velocity c / L
    vel = transport_velocity(grid, v1, v2, p, length=L) / L
    div = kernels.upwind_divergence(w_mid, vel, 1.0 / grid.volumes)
    # mesh-motion term ((1 - xi) g' + xi h') / L * w_xi, upwinded by its sign
    coef = ((1.0 - grid.x) * gdot + grid.x * hdot) / L
    fwd = np.zeros_like(w_mid)
    bwd = np.zeros_like(w_mid)
    fwd[:-1] = (w_mid[1:] - w_mid[:-1]) / dxi
    bwd[1:] = (w_mid[1:] - w_mid[:-1]) / dxi
    mesh = np.where(coef > 0.0, coef * fwd, coef * bwd)
    rhs = w_mid - dt * div + dt * mesh + react
    rhs[-1] = 0.0
    if double:
        rhs[0] = 0.0

    r = dt / (L * dxi) ** 2
    if cfg.scheme == "imex":
        w_new = kernels.solve_tridiagonal(*diffusion_system(grid.n_nodes, r, double, True), rhs)
    else:
        lap = np.zeros_like(w_mid)
        lap[1:-1] = w_mid[:-2] - 2.0 * w_mid[1:-1] + w_mid[2:]
        if not double:
            lap[0] = 2.0 * (w_mid[1] - w_mid[0])
        w_new = rhs + r * lap

    h_new = state.h + dt * hdot
    g_new = state.g + dt * gdot if double else None
    length_new = h_new - (g_new or 0.0)

    if cfg.reaction != "euler":
        x_new = (g_new or 0.0) + grid.x * length_new
        w_new = logistic_rk4_nodes(w_new, t + 0.5 * dt, 0.5 * dt, x_new, coeffs)
    w_new[-1] = 0.0
    if double:
        w_new[0] = 0.0

    neg = w_new < 0.0
    clipped = float(-np.dot(grid.volumes[neg], w_new[neg])) * length_new if neg.any() else 0.0
    if neg.any() and cfg.clip_negative:
        w_new[neg] = 0.0
    if not np.all(np.isfinite(w_new)):
        raise BlowupDetected("non-finite density", t + dt)
    if cfg.blowup_ceiling is not None and float(w_new.max()) > cfg.blowup_ceiling:
        raise BlowupDetected(f"max u = {w_new.max():.6g} exceeds ceiling {cfg.blowup_ceiling:.6g}", t + dt)
    if h0 is not None and length_new < collapse_factor * dxi * h0:
        raise FrontCollapse(f"domain length {length_new:.3e} below {collapse_factor:g}*dxi*h0", t + dt)

    v1n, v2n = solve_chemicals(grid, w_new, p, length_new)
    new = FreeBoundaryState(t + dt, h_new, w_new, v1n, v2n, g_new, state.h_history, state.g_history)
    new.h_history.append(h_new)
    if double:
        new.g_history.append(g_new)
    return new, clipped, ux_r


def run_free_boundary(n_cells: int, u0_ref: np.ndarray, h0: float, coeffs: CoefficientField, p: ModelParams,
                      cfg: StepConfig, probes=None, *, t0: float = 0.0, g0: Optional[float] = None,
                      bounds: Optional[BoundSet] = None, collapse_factor: float = 4.0) -> TimeSeries:
    """Integrate a single (``g0=None``) or double front problem to ``cfg.t_end``.

    ``u0_ref`` holds ``u0`` sampled on the reference nodes, i.e. at
    ``x = g0 + xi (h0 - g0)``. The series carries ``h``, ``g`` (double only) and
    ``ux_front`` columns besides the density statistics.
    """
    state = initial_fb_state(n_cells, u0_ref, h0, p, t0, g0)
    grid = reference_grid(n_cells, g0 is not None)
    if cfg.blowup_ceiling is None:
        cfg = StepConfig(**{**cfg.__dict__, "blowup_ceiling": default_ceiling(
            bounds, float(state.w.max()), coeffs, cfg.blowup_factor)})
    ts = TimeSeries()
    L0 = state.length
    ts.meta.update(backend=kernels.BACKEND, u0_sup=float(state.w.max()), u0_inf=float(state.w.min()),
                   h0=h0, g0=g0, t0=t0, t_end=cfg.t_end)
    times = probe_times(t0, cfg.t_end, probes)
    clip_total = 0.0
    sup_max = float(state.w.max())
    n_steps = 0
    ux = front_slopes(state.w, grid.dx, L0, state.double)[0]

    def record(s, ux_front):
        row = dict(t=s.t, sup_u=s.w.max(), inf_u=s.w.min(), mass=grid.integrate(s.w) * s.length,
                   clip_mass=clip_total, h=s.h, ux_front=ux_front)
        if s.double:
            row["g"] = s.g
        ts.append(**row)

    next_probe = 0
    if times is None or (len(times) and abs(times[0] - t0) < 1e-12):
        record(state, ux)
        next_probe = 1
    eps = 1e-12 * max(1.0, abs(cfg.t_end))
    while state.t < cfg.t_end - eps:
        dt = cfg.dt if cfg.dt is not None else fb_admissible_dt(grid, state, p, cfg)
        stop = cfg.t_end
        if times is not None and next_probe < len(times):
            stop = min(stop, times[next_probe])
        if state.t + dt > stop - eps:
            dt = stop - state.t
        try:
            state, clipped, ux = stefan_step(grid, state, coeffs, p, cfg, dt, h0=L0, collapse_factor=collapse_factor)
        except NumericalFailure as exc:
            exc.time = state.t if exc.time is None else exc.time
            raise
        n_steps += 1
        clip_total += clipped
        sup_max = max(sup_max, float(state.w.max()))
        if times is None:
            record(state, ux)
        elif next_probe < len(times) and abs(state.t - times[next_probe]) <= eps:
            record(state, ux)
            next_probe += 1
    ts.meta.update(sup_u_max=sup_max, clip_mass=clip_total, steps=n_steps)
    ts.final = state
    return ts


OUTCOMES = ("spreading", "vanishing", "undecided")


def detect_outcome(ts: TimeSeries, h0: float, m0: Optional[float], *, spread_factor: float = 10.0,
                   vanish_sup: float = 1e-4, plateau_rate: float = 1e-6) -> str:
    """Heuristic spreading/vanishing classifier over the final quarter of a run.

    ``m0`` is the persistence floor; ``None`` (hypothesis not met) falls back
    to requiring ``sup u >= vanish_sup`` for spreading.
    """
    t = ts.array("t")
    h = ts.array("h")
    sup_u = ts.array("sup_u")
    if len(t) == 0:
        return "undecided"
    tail = t >= t[0] + 0.75 * (t[-1] - t[0])
    if not tail.any():
        tail[-1] = True
    floor = 0.5 * m0 if m0 is not None else vanish_sup
    spreading = h[-1] > spread_factor * h0 and sup_u[tail].min() >= floor
    if "g" in ts.columns:
        g = ts.array("g")
        spreading = (h[-1] - g[-1]) > spread_factor * (h[0] - g[0]) and sup_u[tail].min() >= floor
    if spreading:
        return "spreading"
    t_tail = t[tail]
    span = t_tail[-1] - t_tail[0]
    width = h - (ts.array("g") if "g" in ts.columns else 0.0)
    w_tail = width[tail]
    growth = (w_tail[-1] - w_tail[0]) / (w_tail[0] * span) if span > 0 else 0.0
    if sup_u[-1] < vanish_sup and growth < plateau_rate:
        return "vanishing"
    return "undecided"
