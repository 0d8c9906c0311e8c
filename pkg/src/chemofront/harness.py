"""Quantitative checks run against completed simulations.

Every ``check_*`` function is a pure function of a finished
:class:`~chemofront.stepper.TimeSeries` (plus bounds or a reference orbit);
it copies what it reads and never mutates the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels
from .errors import HypothesisViolated, NumericalFailure
from .grid import Grid, StateField, restrict_even
from .params import BoundSet, CoefficientField
from .stepper import TimeSeries


@dataclass
class CheckReport:
    """Outcome of one check.

    ``passed`` is ``None`` for recorded-only runs (negative controls), where
    the measured quantities are kept but nothing is asserted.
    """

    name: str
    passed: Optional[bool]
    measured: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": to_jsonable(self.measured),
            "bounds": to_jsonable(self.bounds),
            "tolerances": to_jsonable(self.tolerances),
            "failures": list(self.failures),
        }


def to_jsonable(obj):
    """Convert numpy scalars/arrays into JSON-friendly Python values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------- periodic orbit


@dataclass
class PeriodicOrbit:
    """The positive periodic solution of ``u' = (a(t) - b(t) u) u`` sampled over one period.

    ``samples[k]`` approximates ``u*(k T / n)``, ``k = 0..n`` (so the first and
    last entries describe the same phase). Calling the orbit evaluates a
    periodic cubic spline at ``t mod T``.
    """

    period_T: float
    samples: np.ndarray
    u_star_inf: float
    periodicity_gap: float = 0.0
    iterations: int = 0
    _spline: Optional[CubicSpline] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        s[-1] = s[0]
        tt = np.linspace(0.0, self.period_T, len(s))
        self._spline = CubicSpline(tt, s, bc_type="periodic")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.period_T, len(self.samples))

    def __call__(self, t, x=None):
        """``u*(t)``; with ``x`` given, broadcast to the shape of ``x`` (a spatial target)."""
        val = self._spline(np.mod(t, self.period_T))
        if x is None:
            return val
        return np.full(np.shape(x), float(val))

    def ode_residual(self, coeffs: CoefficientField) -> float:
        """Max of ``|u*' - (a - b u*) u*|`` on the sample lattice (spline derivative)."""
        tt = self.times
        u = self._spline(tt)
        du = self._spline(tt, 1)
        x0 = np.zeros(1)
        a = np.array([coeffs.a(t, x0)[0] for t in tt])
        b = np.array([coeffs.b(t, x0)[0] for t in tt])
        return float(np.max(np.abs(du - (a - b * u) * u)))


def _stage_arrays(fn, T: float, n_steps: int) -> np.ndarray:
    """Coefficient values at the start, midpoint and end of each RK4 step."""
    dt = T / n_steps
    x0 = np.zeros(1)
    k = np.arange(n_steps)
    out = np.empty((n_steps, 3))
    for j, frac in enumerate((0.0, 0.5, 1.0)):
        out[:, j] = [fn(t, x0)[0] for t in (k + frac) * dt]
    return out


def solve_periodic_orbit(coeffs: CoefficientField, n_steps: int = 10_000, tol: float = 1e-12,
                         max_periods: int = 1000, u_start: Optional[float] = None) -> PeriodicOrbit:
    """Fixed point of the period map by forward iteration.

    Each period is integrated with classical RK4 at ``dt = T / n_steps``; the
    map is iterated from ``a_sup / b_inf`` (or ``u_start``) until successive
    period-end values differ by less than ``tol``. Constant coefficients are
    treated as ``T = 1``.
    """
    if not coeffs.x_independent:
        raise ValueError("the periodic orbit needs coefficients that depend on t only")
    if not coeffs.h0_ok:
        raise HypothesisViolated("the periodic orbit needs a_inf > 0 and b_inf > 0")
    T = coeffs.period_T if coeffs.period_T is not None else 1.0
    a_st = _stage_arrays(coeffs.a, T, n_steps)
    b_st = _stage_arrays(coeffs.b, T, n_steps)
    dt = T / n_steps
    u = coeffs.a_sup / coeffs.b_inf if u_start is None else float(u_start)
    if not u > 0.0:
        raise ValueError("u_start must be positive")
    for it in range(1, max_periods + 1):
        traj = kernels.logistic_rk4(u, a_st, b_st, dt)
        end = float(traj[-1])
        if abs(end - u) < tol:
            return PeriodicOrbit(T, traj, float(traj.min()), abs(end - float(traj[0])), it)
        u = end
    raise NumericalFailure(f"no-convergence: period map not settled after {max_periods} periods")


# ---------------------------------------------------------------- eigenpair


@dataclass(frozen=True)
class EigenPair:
    """Principal Dirichlet eigenpair of ``phi'' + a0 phi`` on ``(-L, L)``."""

    L: float
    a0: float
    sigma_L: float

    def phi_L(self, x):
        return np.cos(np.pi * np.asarray(x, dtype=np.float64) / (2.0 * self.L))


def principal_eigenpair(a_inf: float, L: float) -> EigenPair:
    """``a0 = a_inf / 3`` and ``sigma_L = a0 - pi^2 / (4 L^2)``."""
    if not L > 0.0:
        raise ValueError("L must be positive")
    a0 = a_inf / 3.0
    return EigenPair(float(L), a0, a0 - np.pi**2 / (4.0 * L * L))


# ---------------------------------------------------------------- bound checks


def check_global_bound(ts: TimeSeries, bounds: BoundSet, tol: float = 1e-2,
                       final_fraction: float = 0.1) -> CheckReport:
    """Run-wide ceiling ``C(u0)`` and eventual ceiling ``limsup_bound`` on the last ``final_fraction``."""
    rep = CheckReport("global-bound", True, tolerances={"rel": tol, "final_fraction": final_fraction})
    try:
        C = bounds.require("C_u0")
        limsup = bounds.require("limsup_bound")
    except HypothesisViolated as exc:
        rep.passed = None
        rep.failures.append(f"not applicable: {exc}")
        return rep
    t = ts.t.copy()
    sup_u = ts.array("sup_u")
    run_max = float(ts.meta.get("sup_u_max", sup_u.max()))
    t0, t1 = t[0], t[-1]
    window = t >= t1 - final_fraction * (t1 - t0)
    final_sup = float(sup_u[window].max())
    rep.bounds.update(C_u0=C, limsup_bound=limsup)
    rep.measured.update(sup_u_max=run_max, final_window_sup=final_sup, observed_gap=limsup - final_sup)
    if run_max > C * (1.0 + tol):
        when = ts.meta.get("t_sup_max")
        if when is None:
            when = float(t[np.argmax(sup_u > C * (1.0 + tol))])
        rep.failures.append(f"sup u = {run_max:.6g} exceeds C(u0)(1+tol) = {C * (1 + tol):.6g} at t = {when:.6g}")
    if final_sup > limsup * (1.0 + tol):
        bad = window & (sup_u > limsup * (1.0 + tol))
        rep.failures.append(f"final-window sup u = {final_sup:.6g} exceeds limsup_bound(1+tol) = "
                            f"{limsup * (1 + tol):.6g} at t = {float(t[np.argmax(bad)]):.6g}")
    rep.passed = not rep.failures
    return rep


def check_persistence(ts: TimeSeries, bounds: BoundSet, tol: float = 1e-2) -> CheckReport:
    """Earliest ``T*`` after which ``m0 (1 - tol) <= u <= M0 (1 + tol)`` holds to the end of the run."""
    rep = CheckReport("persistence", True, tolerances={"rel": tol})
    try:
        m0 = bounds.require("m0")
        M0 = bounds.require("M0")
    except HypothesisViolated as exc:
        rep.passed = None
        rep.failures.append(f"not applicable: {exc}")
        return rep
    t = ts.t.copy()
    lo, hi = m0 * (1.0 - tol), M0 * (1.0 + tol)
    inside = (ts.array("inf_u") >= lo) & (ts.array("sup_u") <= hi)
    rep.bounds.update(m0=m0, M0=M0, corridor=[lo, hi])
    rep.measured.update(final_inf_u=float(ts.array("inf_u")[-1]), final_sup_u=float(ts.array("sup_u")[-1]))
    if not inside[-1]:
        rep.failures.append(f"outside the corridor [{lo:.6g}, {hi:.6g}] at t_end = {t[-1]:.6g}")
        rep.measured["T_star"] = None
    else:
        outside = np.flatnonzero(~inside)
        k = 0 if outside.size == 0 else int(outside[-1]) + 1
        rep.measured["T_star"] = float(t[k])
        if k > 0:
            rep.measured["last_violation_t"] = float(t[k - 1])
    rep.passed = not rep.failures
    return rep


def plateau_envelope(t: np.ndarray, e: np.ndarray, epoch: float) -> np.ndarray:
    """Tail suprema ``S_k = sup{e(s) : s >= t0 + k epoch}`` over complete epochs."""
    n = int(math.floor((t[-1] - t[0]) / epoch + 1e-9))
    tail = np.maximum.accumulate(e[::-1])[::-1]
    idx = np.searchsorted(t, t[0] + epoch * np.arange(n + 1) - 1e-9)
    return tail[idx]


def _envelope_ratios(t, e, epoch, burn_in, floor):
    S = plateau_envelope(t, e, epoch)
    ratios = [S[k + 1] / S[k] for k in range(burn_in, len(S) - 1) if S[k + 1] > floor and S[k] > floor]
    return S, ratios


def check_convergence(ts: TimeSeries, orbit: PeriodicOrbit, rho: Optional[float], *, abs_tol: float = 1e-4,
                      slack: float = 0.1, epoch: Optional[float] = None, max_multiple: int = 10,
                      burn_in: int = 2, floor: float = 1e-6, negative_control: bool = False) -> CheckReport:
    """Convergence to the periodic orbit plus a geometric envelope.

    ``ts`` must carry ``err_to_target``, the distance to ``orbit`` (use the
    orbit as the run's target). The final error must be below ``abs_tol``.

    The envelope uses tail suprema ``S_k`` over epochs of equal length; the
    ratios ``S_{k+1} / S_k`` (after ``burn_in`` epochs, and while both
    plateaus exceed ``floor``) must not exceed ``rho + slack``. Stage lengths
    of the contraction argument are not quantified, so unless ``epoch`` is
    given the epoch is the smallest multiple ``m T`` of the period,
    ``m <= max_multiple``, for which the envelope holds; the chosen ``m`` is
    reported. If no multiple works the ``m = 1`` ratios are reported.
    """
    rep = CheckReport("convergence", True,
                      tolerances={"abs": abs_tol, "ratio_slack": slack, "floor": floor, "burn_in": burn_in},
                      bounds={"rho": rho})
    t = ts.t.copy()
    e = ts.array("err_to_target")
    limit = (rho if rho is not None else 0.0) + slack
    if epoch is not None:
        candidates = [float(epoch)]
    else:
        candidates = [m * orbit.period_T for m in range(1, max_multiple + 1)]
    chosen = None
    for tau in candidates:
        S, ratios = _envelope_ratios(t, e, tau, burn_in, floor)
        if ratios and max(ratios) <= limit:
            chosen = (tau, S, ratios)
            break
    if chosen is None:
        tau = candidates[0]
        S, ratios = _envelope_ratios(t, e, tau, burn_in, floor)
        chosen = (tau, S, ratios)
    tau, S, ratios = chosen
    rep.bounds["epoch"] = tau
    rep.measured.update(final_error=float(e[-1]), max_error=float(e.max()), plateaus=S,
                        ratios=ratios, max_ratio=max(ratios) if ratios else None)
    if negative_control:
        rep.passed = None
        return rep
    if rho is None:
        rep.passed = None
        rep.failures.append("not applicable: contraction ratio unavailable")
        return rep
    if not e[-1] < abs_tol:
        rep.failures.append(f"final error {e[-1]:.3e} not below {abs_tol:.1e}; trace {np.round(S, 12).tolist()}")
    if ratios and max(ratios) > limit:
        rep.failures.append(f"envelope ratio {max(ratios):.4f} exceeds rho + slack = {limit:.4f} "
                            f"for every epoch up to {candidates[-1]:g}")
    rep.passed = not rep.failures
    return rep


def check_reflection(whole_grid: Grid, whole: StateField, half_grid: Grid, half: StateField,
                     tol: float = 1e-3, even_tol: float = 1e-8) -> CheckReport:
    """Restrict an even whole-line state to ``x >= 0`` and compare with the half-line state."""
    rep = CheckReport("reflection", True, tolerances={"abs": tol, "even": even_tol})
    restricted_grid, restricted = restrict_even(whole_grid, whole, tol=even_tol)
    if restricted_grid.n_nodes != half_grid.n_nodes or abs(restricted_grid.x_max - half_grid.x_max) > 1e-12:
        raise ValueError("whole-line and half-line grids do not share nodes on x >= 0")
    err = float(np.max(np.abs(restricted.u - half.u)))
    rep.measured.update(max_error=err, t=float(half.t))
    if not err <= tol:
        rep.failures.append(f"max |u_whole - u_half| = {err:.3e} exceeds {tol:.1e}")
    rep.passed = not rep.failures
    return rep


def check_truncation(ts_short: TimeSeries, ts_long: TimeSeries, tol: float = 1e-3) -> CheckReport:
    """Doubling check: sup/inf statistics must not move by more than ``tol`` when ``x_max`` doubles."""
    rep = CheckReport("truncation", True, tolerances={"abs": tol})
    if not np.allclose(ts_short.t, ts_long.t, rtol=0.0, atol=1e-12):
        raise ValueError("the two runs must share probe times")
    d_sup = float(np.max(np.abs(ts_short.array("sup_u") - ts_long.array("sup_u"))))
    d_inf = float(np.max(np.abs(ts_short.array("inf_u") - ts_long.array("inf_u"))))
    rep.measured.update(sup_change=d_sup, inf_change=d_inf)
    if max(d_sup, d_inf) >= tol:
        rep.failures.append(f"statistics moved by {max(d_sup, d_inf):.3e} >= {tol:.1e} under doubling")
    rep.passed = not rep.failures
    return rep


def check_lower_barrier(ts: TimeSeries, bounds: BoundSet, delta: float, T0: float) -> CheckReport:
    """Empirical barrier probe: data in ``[delta, M+]`` stay in ``[delta, M+]`` at time ``t0 + T0``."""
    rep = CheckReport("lower-barrier", True, tolerances={"delta": delta, "T0": T0})
    M_plus = bounds.M_plus
    t = ts.t
    k = int(np.argmin(np.abs(t - (t[0] + T0))))
    inf_u, sup_u = float(ts.array("inf_u")[k]), float(ts.array("sup_u")[k])
    rep.bounds.update(M_plus=M_plus)
    rep.measured.update(t=float(t[k]), inf_u=inf_u, sup_u=sup_u)
    if inf_u < delta:
        rep.failures.append(f"inf u = {inf_u:.6g} fell below delta = {delta:.6g} at t = {t[k]:.6g}")
    if sup_u > M_plus:
        rep.failures.append(f"sup u = {sup_u:.6g} exceeds M+ = {M_plus:.6g} at t = {t[k]:.6g}")
    rep.passed = not rep.failures
    return rep


def check_mass_and_clip(ts: TimeSeries, clip_rel: float = 1e-8) -> CheckReport:
    """Cumulative clipped mass relative to the final total mass."""
    rep = CheckReport("scheme-health", True, tolerances={"clip_rel": clip_rel})
    clip = float(ts.meta.get("clip_mass", ts.array("clip_mass")[-1]))
    mass = float(ts.array("mass")[-1])
    rep.measured.update(clip_mass=clip, final_mass=mass)
    if clip > clip_rel * max(mass, 0.0) and clip > 0.0:
        rep.failures.append(f"clipped mass {clip:.3e} exceeds {clip_rel:.0e} of total mass {mass:.6g}")
    rep.passed = not rep.failures
    return rep


def check_fronts(ts: TimeSeries) -> CheckReport:
    """Front monotonicity: ``h`` nondecreasing and ``g`` nonincreasing over the whole series."""
    rep = CheckReport("fronts", True)
    h = ts.array("h")
    dh = float(np.min(np.diff(h), initial=0.0))
    rep.measured.update(h_final=float(h[-1]), min_h_increment=dh)
    if dh < 0.0:
        rep.failures.append(f"h decreased by {-dh:.3e}")
    if "g" in ts.columns:
        g = ts.array("g")
        dg = float(np.max(np.diff(g), initial=0.0))
        rep.measured.update(g_final=float(g[-1]), max_g_increment=dg, symmetry_gap=float(np.max(np.abs(g + h))))
        if dg > 0.0:
            rep.failures.append(f"g increased by {dg:.3e}")
    rep.passed = not rep.failures
    return rep
