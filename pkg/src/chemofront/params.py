"""Model constants, logistic coefficients, hypothesis checks and derived bounds.

Notation follows the model

    u_t = u_xx - chi1 (u v1_x)_x + chi2 (u v2_x)_x + u (a(t,x) - b(t,x) u)
    0   = v1_xx - lambda1 v1 + mu1 u
    0   = v2_xx - lambda2 v2 + mu2 u

with ``nu`` the Stefan coefficient of the moving front(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import HypothesisViolated

CoefficientFn = Callable[[float, np.ndarray], np.ndarray]


def _pos(x: float) -> float:
    return x if x > 0.0 else 0.0


@dataclass(frozen=True)
class ModelParams:
    chi1: float
    chi2: float
    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    nu: float = 1.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "nu"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("chi1", "chi2", "mu1", "mu2"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)!r}")

    @classmethod
    def attraction_only(cls, chi1: float, mu1: float, lambda1: float, nu: float = 1.0) -> "ModelParams":
        """Pure chemoattraction with the repellent switched off and ``lambda2 := lambda1``.

        Binding the unused decay rate to ``lambda1`` is a choice, not a
        consequence of ``chi2 = 0``; it is what makes ``M`` vanish and ``K``
        equal ``chi1 * mu1``.
        """
        return cls(chi1=chi1, chi2=0.0, lambda1=lambda1, lambda2=lambda1, mu1=mu1, mu2=0.0, nu=nu)

    @property
    def net_sensitivity(self) -> float:
        """``chi1*mu1 - chi2*mu2``, the net attraction entering every bound."""
        return self.chi1 * self.mu1 - self.chi2 * self.mu2

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("chi1", "chi2", "lambda1", "lambda2", "mu1", "mu2", "nu")}


def _constant_fn(value: float) -> CoefficientFn:
    def fn(t, x):
        return np.full(np.shape(x), value, dtype=np.float64)

    return fn


@dataclass(frozen=True)
class CoefficientField:
    """Logistic coefficients ``a(t, x)``, ``b(t, x)`` with their extrema.

    The extrema are taken over a sampled ``(t, x)`` window; see
    :meth:`from_callables`. ``x_independent`` marks coefficients that depend on
    time only, which the periodic-orbit machinery requires.
    """

    a: CoefficientFn
    b: CoefficientFn
    a_inf: float
    a_sup: float
    b_inf: float
    b_sup: float
    period_T: Optional[float] = None
    x_independent: bool = False

    def __post_init__(self):
        if self.a_inf > self.a_sup or self.b_inf > self.b_sup:
            raise ValueError("coefficient extrema are inconsistent (inf > sup)")
        if self.period_T is not None and not self.period_T > 0.0:
            raise ValueError("period_T must be positive when given")

    @property
    def h0_ok(self) -> bool:
        return self.a_inf > 0.0 and self.b_inf > 0.0

    @classmethod
    def constant(cls, a: float, b: float) -> "CoefficientField":
        return cls(_constant_fn(a), _constant_fn(b), a, a, b, b, None, True)

    @classmethod
    def from_callables(
        cls,
        a: CoefficientFn,
        b: CoefficientFn,
        t_samples: np.ndarray,
        x_samples: np.ndarray,
        period_T: Optional[float] = None,
        x_independent: bool = False,
    ) -> "CoefficientField":
        """Build a field whose extrema are sampled on the lattice ``t_samples x x_samples``."""
        t_samples = np.atleast_1d(np.asarray(t_samples, dtype=np.float64))
        x_samples = np.atleast_1d(np.asarray(x_samples, dtype=np.float64))
        a_vals = np.array([a(t, x_samples) for t in t_samples])
        b_vals = np.array([b(t, x_samples) for t in t_samples])
        return cls(
            a,
            b,
            float(a_vals.min()),
            float(a_vals.max()),
            float(b_vals.min()),
            float(b_vals.max()),
            period_T,
            x_independent,
        )

    def is_periodic(self, x_samples: np.ndarray, n_t: int = 64, tol: float = 1e-10) -> bool:
        """Check ``a(t+T, x) = a(t, x)`` and likewise for ``b`` on a sample lattice."""
        if self.period_T is None:
            return False
        T = self.period_T
        for t in np.linspace(0.0, T, n_t, endpoint=False):
            for fn in (self.a, self.b):
                if np.max(np.abs(fn(t + T, x_samples) - fn(t, x_samples))) > tol:
                    return False
        return True


def compute_M(p: ModelParams) -> float:
    """Upper constant for the attraction-repulsion imbalance ``chi2 lambda2 v2 - chi1 lambda1 v1``."""
    s1 = p.chi1 * p.mu1
    s2 = p.chi2 * p.mu2
    excess = _pos(s2 * p.lambda2 - s1 * p.lambda1)
    dl = _pos(p.lambda1 - p.lambda2)
    return min((excess + s1 * dl) / p.lambda2, (excess + s2 * dl) / p.lambda1)


def compute_K(p: ModelParams) -> float:
    """Lipschitz-type constant for ``chi2 mu2 v2 - chi1 mu1 v1`` (two-sided version of ``M``)."""
    s1 = p.chi1 * p.mu1
    s2 = p.chi2 * p.mu2
    excess = abs(s1 * p.lambda1 - s2 * p.lambda2)
    dl = abs(p.lambda1 - p.lambda2)
    return min((excess + s1 * dl) / p.lambda2, (excess + s2 * dl) / p.lambda1)


@dataclass(frozen=True)
class HypothesisReport:
    M: float
    K: float
    h0_ok: bool
    h1_ok: bool
    h2_ok: bool
    h3_ok: bool
    margins: dict

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "K": self.K,
            "H0": self.h0_ok,
            "H1": self.h1_ok,
            "H2": self.h2_ok,
            "H3": self.h3_ok,
            "margins": dict(self.margins),
        }


def check_hypotheses(p: ModelParams, c: CoefficientField) -> HypothesisReport:
    """Evaluate the standing hypotheses as strict inequalities.

    Margins are ``b_inf`` minus each right-hand side (for H0 the smaller of
    ``a_inf`` and ``b_inf``), so a positive margin means the hypothesis holds.
    """
    M = compute_M(p)
    K = compute_K(p)
    s1 = p.chi1 * p.mu1
    s2 = p.chi2 * p.mu2
    ratio = c.a_sup / c.a_inf if c.a_inf > 0.0 else math.inf
    margins = {
        "H0": min(c.a_inf, c.b_inf),
        "H1": c.b_inf - (s1 - s2 + M),
        "H2": c.b_inf - ((1.0 + ratio) * s1 - s2 + M),
        "H3": c.b_inf - (s1 - s2 + K),
    }
    return HypothesisReport(
        M=M,
        K=K,
        h0_ok=margins["H0"] > 0.0,
        h1_ok=margins["H1"] > 0.0,
        h2_ok=margins["H2"] > 0.0,
        h3_ok=margins["H3"] > 0.0,
        margins=margins,
    )


@dataclass(frozen=True)
class BoundSet:
    """Quantitative bounds; a field is ``None`` when its hypothesis fails.

    ``violations`` maps each unavailable field to the reason.
    """

    C_u0: Optional[float]
    limsup_bound: Optional[float]
    M0: Optional[float]
    m0: Optional[float]
    rho: Optional[float]
    violations: dict = field(default_factory=dict)

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise HypothesisViolated(f"{name} unavailable: {self.violations.get(name, 'hypothesis fails')}")
        return value

    @property
    def M_plus(self) -> float:
        """Ceiling ``limsup_bound + 1`` used by lower-barrier probes."""
        return self.require("limsup_bound") + 1.0

    def to_dict(self) -> dict:
        return {
            "C_u0": self.C_u0,
            "limsup_bound": self.limsup_bound,
            "M0": self.M0,
            "m0": self.m0,
            "rho": self.rho,
            "not_applicable": dict(self.violations),
        }


def derive_bounds(p: ModelParams, c: CoefficientField, u0_sup: float) -> BoundSet:
    """Global ceiling, eventual ceiling, persistence corridor and contraction ratio."""
    rep = check_hypotheses(p, c)
    net = c.b_inf - p.net_sensitivity  # b_inf + chi2 mu2 - chi1 mu1
    violations = {}

    limsup = C_u0 = M0 = m0 = rho = None
    denom1 = net - rep.M
    if denom1 > 0.0 and rep.h1_ok:
        limsup = c.a_sup / denom1
        C_u0 = max(float(u0_sup), limsup)
        M0 = limsup
    else:
        for name in ("C_u0", "limsup_bound", "M0"):
            violations[name] = f"H1 fails (b_inf + chi2 mu2 - chi1 mu1 - M = {denom1:.6g})"

    denom_sup = c.b_sup - p.net_sensitivity
    if rep.h2_ok and limsup is not None and denom_sup > 0.0:
        m0 = c.a_inf * rep.margins["H2"] / (denom1 * denom_sup)
    else:
        violations["m0"] = f"H2 fails (margin {rep.margins['H2']:.6g})"

    if net > 0.0:
        rho = rep.K / net
    else:
        violations["rho"] = f"b_inf + chi2 mu2 - chi1 mu1 = {net:.6g} <= 0"

    return BoundSet(C_u0, limsup, M0, m0, rho, violations)
