import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemofront.errors import HypothesisViolated
from chemofront.params import (
    CoefficientField,
    ModelParams,
    check_hypotheses,
    compute_K,
    compute_M,
    derive_bounds,
)

pos = st.floats(0.05, 5.0, allow_nan=False)
nonneg = st.floats(0.0, 5.0, allow_nan=False)


@st.composite
def model_params(draw):
    return ModelParams(draw(nonneg), draw(nonneg), draw(pos), draw(pos), draw(nonneg), draw(nonneg), draw(pos))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1.0, 0.0, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(-1.0, 0.0, 1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, nu=0.0)


def test_attraction_only_binds_lambda2():
    p = ModelParams.attraction_only(1.5, 2.0, 0.7)
    assert (p.chi2, p.mu2, p.lambda2) == (0.0, 0.0, 0.7)


@pytest.mark.parametrize(
    "p, M, K",
    [
        (ModelParams(1.0, 0.0, 1.0, 1.0, 1.0, 0.0), 0.0, 1.0),
        (ModelParams(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), 0.0, 0.0),
        (ModelParams(chi1=1.0, chi2=1.0, lambda1=2.0, lambda2=1.0, mu1=1.0, mu2=2.0), 1.0, 1.0),
    ],
)
def test_constants_examples(p, M, K):
    assert compute_M(p) == pytest.approx(M, abs=1e-15)
    assert compute_K(p) == pytest.approx(K, abs=1e-15)


@given(model_params())
def test_M_not_above_K(p):
    M, K = compute_M(p), compute_K(p)
    assert 0.0 <= M <= K + 1e-12 * max(1.0, K)


@given(model_params(), st.floats(0.1, 10.0))
def test_constants_scale_with_production(p, s):
    q = ModelParams(p.chi1, p.chi2, p.lambda1, p.lambda2, p.mu1 * s, p.mu2 * s, p.nu)
    assert compute_M(q) == pytest.approx(s * compute_M(p), rel=1e-10, abs=1e-12)
    assert compute_K(q) == pytest.approx(s * compute_K(p), rel=1e-10, abs=1e-12)


def test_H3_implies_H1_over_many_draws():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        p = ModelParams(*rng.uniform(0.0, 3.0, 2), *rng.uniform(0.1, 4.0, 2), *rng.uniform(0.0, 3.0, 2))
        b = rng.uniform(0.01, 10.0)
        rep = check_hypotheses(p, CoefficientField.constant(1.0, b))
        assert not rep.h3_ok or rep.h1_ok


def test_balanced_constants_vanish():
    p = ModelParams(2.0, 1.0, 1.3, 1.3, 1.0, 2.0)
    assert compute_M(p) == 0.0 and compute_K(p) == 0.0


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.1, 4.0), st.floats(0.1, 3.0),
       st.floats(0.0, 2.0), st.floats(0.05, 8.0))
def test_attraction_only_reductions(chi1, mu1, lam, a_inf, a_spread, b_inf):
    p = ModelParams.attraction_only(chi1, mu1, lam)
    c = CoefficientField(CoefficientField.constant(1, 1).a, CoefficientField.constant(1, 1).b,
                         a_inf, a_inf + a_spread, b_inf, b_inf + 1.0)
    rep = check_hypotheses(p, c)
    s = chi1 * mu1
    assert rep.M == 0.0
    assert rep.h1_ok == (b_inf > s)
    assert rep.h2_ok == (b_inf > (1.0 + c.a_sup / a_inf) * s)
    if abs(b_inf - 2.0 * s) > 1e-12:
        assert rep.h3_ok == (b_inf > 2.0 * s)


def test_hypothesis_examples():
    rep = check_hypotheses(ModelParams(0, 0, 1, 1, 1, 1), CoefficientField.constant(1.0, 1.0))
    assert rep.h0_ok and rep.h1_ok and rep.h2_ok and rep.h3_ok
    assert rep.margins["H1"] == rep.margins["H2"] == rep.margins["H3"] == 1.0

    p = ModelParams.attraction_only(1.0, 1.0, 1.0)
    rep = check_hypotheses(p, CoefficientField.constant(1.0, 1.5))
    assert rep.h1_ok and not rep.h3_ok

    p = ModelParams(chi1=1.0, chi2=1.0, lambda1=2.0, lambda2=1.0, mu1=1.0, mu2=2.0)
    rep = check_hypotheses(p, CoefficientField.constant(1.0, 3.0))
    assert rep.h3_ok and rep.margins["H3"] == pytest.approx(3.0)


def test_report_field_names():
    d = check_hypotheses(ModelParams(0, 0, 1, 1, 1, 1), CoefficientField.constant(1.0, 1.0)).to_dict()
    assert set(d) == {"M", "K", "H0", "H1", "H2", "H3", "margins"}
    b = derive_bounds(ModelParams(0, 0, 1, 1, 1, 1), CoefficientField.constant(1.0, 1.0), 0.1).to_dict()
    assert {"C_u0", "limsup_bound", "M0", "m0", "rho"} <= set(b)


def test_bounds_pure_logistic():
    b = derive_bounds(ModelParams(0, 0, 1, 1, 1, 1), CoefficientField.constant(1.0, 1.0), 0.1)
    assert (b.limsup_bound, b.C_u0, b.M0, b.m0, b.rho) == (1.0, 1.0, 1.0, 1.0, 0.0)
    assert b.M_plus == 2.0


def test_bounds_rho_half():
    b = derive_bounds(ModelParams.attraction_only(1.0, 1.0, 1.0), CoefficientField.constant(1.0, 3.0), 0.5)
    assert b.rho == pytest.approx(0.5)


def test_initial_datum_dominates_ceiling():
    b = derive_bounds(ModelParams(0, 0, 1, 1, 1, 1), CoefficientField.constant(2.0, 4.0), 1.0)
    assert b.limsup_bound == 0.5 and b.C_u0 == 1.0


def test_failed_hypotheses_are_flagged_not_negative():
    b = derive_bounds(ModelParams.attraction_only(2.0, 1.0, 1.0), CoefficientField.constant(1.0, 1.5), 1.0)
    assert b.limsup_bound is None and b.C_u0 is None and b.m0 is None
    assert "limsup_bound" in b.violations
    with pytest.raises(HypothesisViolated):
        b.require("C_u0")


def test_corridor_ordered_under_H2():
    p = ModelParams(chi1=1.0, chi2=1.0, lambda1=2.0, lambda2=1.0, mu1=1.0, mu2=2.0)
    b = derive_bounds(p, CoefficientField.constant(1.0, 5.0), 1.0)
    assert 0.0 < b.m0 <= b.M0
    assert b.m0 == pytest.approx(4.0 / 30.0)


def test_sampled_extrema_and_periodicity():
    a = lambda t, x: 1.0 + 0.5 * np.sin(2 * np.pi * t) + 0.0 * x
    b = lambda t, x: 1.0 + 0.0 * x
    c = CoefficientField.from_callables(a, b, np.linspace(0, 1, 401), np.zeros(1), 1.0, True)
    assert c.a_inf == pytest.approx(0.5) and c.a_sup == pytest.approx(1.5)
    assert c.is_periodic(np.linspace(0, 5, 7))
    with pytest.raises(ValueError):
        CoefficientField(a, b, 2.0, 1.0, 1.0, 1.0)
    assert not math.isnan(c.b_inf)
