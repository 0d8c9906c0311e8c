import numpy as np
import pytest

from chemofront.errors import BlowupDetected, CFLViolation
from chemofront.grid import make_grid
from chemofront.params import CoefficientField, ModelParams, derive_bounds
from chemofront.stepper import StepConfig, admissible_dt, advance, initial_state, probe_times, run, step

LOGISTIC = ModelParams(0.0, 0.0, 1.0, 1.0, 1.0, 1.0)
ATTRACT = ModelParams.attraction_only(0.3, 1.0, 1.0)


def test_step_config_validation():
    for bad in (dict(scheme="crank"), dict(reaction="rk2"), dict(cfl_safety=0.0), dict(dt=-1.0)):
        with pytest.raises(ValueError):
            StepConfig(**bad)


@pytest.mark.parametrize("scheme", ["imex", "explicit"])
@pytest.mark.parametrize("reaction", ["rk4", "euler"])
def test_equilibrium_is_preserved(scheme, reaction):
    g = make_grid("half_line", 10.0, 100)
    cfg = StepConfig(t_end=2.0, scheme=scheme, reaction=reaction)
    ts = run(g, np.ones(g.n_nodes), CoefficientField.constant(1.0, 1.0), ATTRACT, cfg, 0.5)
    drift = np.max(np.abs(ts.final.u - 1.0))
    assert drift < 1e-8 * 2.0


def test_spatially_flat_logistic_curve():
    g = make_grid("half_line", 5.0, 50)
    ts = run(g, np.full(g.n_nodes, 0.1), CoefficientField.constant(1.0, 1.0), LOGISTIC, StepConfig(t_end=3.0), 1.0)
    t = ts.t
    exact = 0.1 * np.exp(t) / (1.0 + 0.1 * (np.exp(t) - 1.0))
    np.testing.assert_allclose(ts.array("sup_u"), exact, rtol=1e-8)
    np.testing.assert_allclose(ts.array("inf_u"), exact, rtol=1e-8)


@pytest.mark.parametrize("scheme", ["imex", "explicit"])
def test_mass_conserved_without_reaction(scheme):
    g = make_grid("half_line", 20.0, 200)
    u0 = 1.0 + np.exp(-((g.x - 5.0) ** 2))
    coeffs = CoefficientField.constant(0.0, 0.0)
    state = initial_state(g, u0, ATTRACT)
    cfg = StepConfig(scheme=scheme)
    m = g.integrate(state.u)
    for _ in range(50):
        new = step(g, state, coeffs, ATTRACT, cfg)
        m_new = g.integrate(new.u)
        assert abs(m_new - m) <= 1e-10 * m
        state, m = new, m_new


def test_oversized_step_is_rejected():
    g = make_grid("half_line", 10.0, 100)
    state = initial_state(g, np.ones(g.n_nodes), LOGISTIC)
    cfg = StepConfig(scheme="explicit")
    with pytest.raises(CFLViolation):
        advance(g, state, CoefficientField.constant(1.0, 1.0), LOGISTIC, cfg, 10.0 * admissible_dt(g, state, LOGISTIC, cfg))


def test_positivity_and_clip_accounting():
    g = make_grid("half_line", 20.0, 200)
    u0 = np.where(g.x < 2.0, 1.0, 0.0)
    ts = run(g, u0, CoefficientField.constant(1.0, 1.0), ATTRACT, StepConfig(t_end=2.0), 0.5)
    assert ts.final.u.min() >= 0.0
    assert ts.meta["clip_mass"] <= 1e-8 * ts.array("mass").max()


def test_ordered_data_stay_ordered_without_taxis():
    g = make_grid("half_line", 20.0, 200)
    low = 0.2 + 0.1 * np.exp(-g.x)
    high = low + 0.3
    cfg = StepConfig(t_end=1.0, dt=0.01)
    coeffs = CoefficientField.constant(1.0, 1.0)
    a = run(g, low, coeffs, LOGISTIC, cfg).final.u
    b = run(g, high, coeffs, LOGISTIC, cfg).final.u
    assert np.all(a <= b)


def test_probes_land_exactly():
    g = make_grid("half_line", 5.0, 50)
    ts = run(g, np.ones(g.n_nodes), CoefficientField.constant(1.0, 1.0), LOGISTIC, StepConfig(t_end=1.0), 0.25)
    np.testing.assert_allclose(ts.t, [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
    assert set(ts.columns) >= {"t", "sup_u", "inf_u", "mass", "clip_mass"}


@pytest.mark.parametrize("spec, expected", [(0.5, [0.0, 0.5, 1.0]), (0.4, [0.0, 0.4, 0.8, 1.0]),
                                            ([0.3, 2.0, 0.1], [0.1, 0.3]), (None, None)])
def test_probe_times(spec, expected):
    got = probe_times(0.0, 1.0, spec)
    if expected is None:
        assert got is None
    else:
        np.testing.assert_allclose(got, expected)


def test_err_to_target_recorded():
    g = make_grid("half_line", 5.0, 50)
    ts = run(g, np.full(g.n_nodes, 0.5), CoefficientField.constant(1.0, 1.0), LOGISTIC, StepConfig(t_end=1.0), 0.5,
             target=lambda t, x: np.ones_like(x))
    err = ts.array("err_to_target")
    assert err[0] == pytest.approx(0.5) and np.all(np.diff(err) < 0.0)


def test_blowup_ceiling():
    g = make_grid("half_line", 5.0, 50)
    cfg = StepConfig(t_end=1.0, blowup_ceiling=1.5)
    with pytest.raises(BlowupDetected) as info:
        run(g, np.ones(g.n_nodes), CoefficientField.constant(4.0, 1.0), LOGISTIC, cfg)
    assert info.value.time is not None


def test_run_rejects_backward_time():
    g = make_grid("half_line", 5.0, 50)
    with pytest.raises(ValueError):
        run(g, np.ones(g.n_nodes), CoefficientField.constant(1.0, 1.0), LOGISTIC, StepConfig(t_end=0.0))


def test_initial_state_validation():
    g = make_grid("half_line", 5.0, 50)
    with pytest.raises(ValueError):
        initial_state(g, np.ones(3), LOGISTIC)
    with pytest.raises(ValueError):
        initial_state(g, -np.ones(g.n_nodes), LOGISTIC)


def test_default_ceiling_uses_bounds():
    g = make_grid("half_line", 5.0, 50)
    coeffs = CoefficientField.constant(1.0, 1.0)
    b = derive_bounds(LOGISTIC, coeffs, 1.0)
    ts = run(g, np.ones(g.n_nodes), coeffs, LOGISTIC, StepConfig(t_end=0.1), bounds=b)
    assert ts.meta["sup_u_max"] == pytest.approx(1.0)
