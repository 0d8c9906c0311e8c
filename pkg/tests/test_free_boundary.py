import numpy as np
import pytest

from chemofront.errors import FrontCollapse
from chemofront.free_boundary import (
    FreeBoundaryState,
    detect_outcome,
    from_reference,
    front_speeds,
    initial_fb_state,
    reference_grid,
    run_free_boundary,
    stefan_step,
    to_reference,
)
from chemofront.params import CoefficientField, ModelParams
from chemofront.stepper import StepConfig, TimeSeries

LOGISTIC = ModelParams(0.0, 0.0, 1.0, 1.0, 1.0, 1.0)


def test_reference_round_trip():
    xi = np.linspace(0.0, 1.0, 11)
    w = to_reference(np.linspace(0.0, 4.0, 41), np.linspace(0.0, 4.0, 41), 2.0, xi)
    np.testing.assert_allclose(w, 2.0 * xi)
    nodes, back = from_reference(xi, w, 2.0)
    np.testing.assert_allclose(nodes, 2.0 * xi)
    assert from_reference(xi, w, 2.0, x=np.array([3.0]))[0] == 0.0
    with pytest.raises(ValueError):
        to_reference(xi, w, 1.0, xi, g=1.0)


def test_front_speed_from_linear_profile():
    xi = np.linspace(0.0, 1.0, 11)
    _, hdot, ux, _ = front_speeds(2.0 * (1.0 - xi), xi[1], 1.0, False, 0.5)
    assert ux == pytest.approx(-2.0) and hdot == pytest.approx(1.0)


def test_single_front_update():
    grid = reference_grid(10, False)
    w = 2.0 * (1.0 - grid.x)
    p = ModelParams(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, nu=0.5)
    state = initial_fb_state(10, w, 1.0, p)
    new, _, ux = stefan_step(grid, state, CoefficientField.constant(0.0, 0.0), p,
                             StepConfig(reaction="euler"), dt=0.01)
    assert ux == pytest.approx(-2.0)
    assert new.h == pytest.approx(1.01, abs=1e-14)


def test_front_datum_is_projected(caplog):
    state = initial_fb_state(10, np.ones(11), 1.0, LOGISTIC)
    assert state.w[-1] == 0.0
    assert "project" in caplog.text


def test_zero_datum_stays_put():
    ts = run_free_boundary(40, np.zeros(41), 1.0, CoefficientField.constant(1.0, 1.0), LOGISTIC,
                           StepConfig(t_end=1.0), 0.5)
    assert np.all(ts.array("h") == 1.0) and np.all(ts.array("sup_u") == 0.0)


def bump(n, h0):
    xi = np.linspace(0.0, 1.0, n + 1)
    return np.cos(0.5 * np.pi * xi)


def test_single_front_is_monotone():
    p = ModelParams.attraction_only(0.3, 1.0, 1.0)
    ts = run_free_boundary(100, bump(100, 2.0), 2.0, CoefficientField.constant(1.0, 1.0), p, StepConfig(t_end=2.0), 0.1)
    h = ts.array("h")
    assert h[0] == 2.0 and np.all(np.diff(h) >= 0.0) and h[-1] > 2.0
    assert ts.array("inf_u").min() >= 0.0


def test_double_front_symmetry():
    n = 100
    xi = np.linspace(0.0, 1.0, n + 1)
    w = np.sin(np.pi * xi)
    ts = run_free_boundary(n, w, 2.0, CoefficientField.constant(1.0, 1.0), LOGISTIC, StepConfig(t_end=1.0), 0.1,
                           g0=-2.0)
    h, g = ts.array("h"), ts.array("g")
    assert np.max(np.abs(h + g)) < 1e-10
    assert np.all(np.diff(h) >= 0.0) and np.all(np.diff(g) <= 0.0)


def test_collapse_is_reported():
    grid = reference_grid(10, False)
    state = FreeBoundaryState(0.0, 1.0, np.zeros(11), np.zeros(11), np.zeros(11))
    with pytest.raises(FrontCollapse):
        stefan_step(grid, state, CoefficientField.constant(0.0, 0.0), LOGISTIC, StepConfig(), dt=1e-3, h0=1.0,
                    collapse_factor=20.0)


def make_series(h, sup_u):
    ts = TimeSeries()
    for i, (hh, s) in enumerate(zip(h, sup_u)):
        ts.append(t=float(i), h=hh, sup_u=s)
    return ts


@pytest.mark.parametrize("h, sup_u, expected", [
    ([1, 5, 20, 40], [1, 1, 1, 1], "spreading"),
    ([1, 1, 1, 1], [1e-3, 1e-5, 1e-6, 1e-7], "vanishing"),
    ([1, 2, 3, 4], [0.5, 0.5, 0.5, 0.5], "undecided"),
])
def test_detect_outcome(h, sup_u, expected):
    assert detect_outcome(make_series(h, sup_u), 1.0, 1.0) == expected
