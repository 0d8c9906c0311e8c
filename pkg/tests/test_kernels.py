import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import solve_banded

from chemofront import kernels
from chemofront.errors import SingularSystemError


def random_tridiagonal(rng, n):
    lower = rng.uniform(-1.0, 0.0, n)
    upper = rng.uniform(-1.0, 0.0, n)
    diag = 2.5 + rng.uniform(0.0, 1.0, n)
    lower[0] = upper[-1] = 0.0
    return lower, diag, upper


@pytest.mark.parametrize("n", [3, 10, 401])
def test_tridiagonal_matches_banded_solver(backend, rng, n):
    lower, diag, upper = random_tridiagonal(rng, n)
    rhs = rng.normal(size=n)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    expected = solve_banded((1, 1), ab, rhs)
    np.testing.assert_allclose(backend.solve_tridiagonal(lower, diag, upper, rhs), expected, rtol=1e-12, atol=1e-13)


def test_tridiagonal_does_not_modify_inputs(backend, rng):
    lower, diag, upper = random_tridiagonal(rng, 20)
    rhs = rng.normal(size=20)
    copies = [a.copy() for a in (lower, diag, upper, rhs)]
    backend.solve_tridiagonal(lower, diag, upper, rhs)
    for a, b in zip((lower, diag, upper, rhs), copies):
        np.testing.assert_array_equal(a, b)


def test_tridiagonal_zero_pivot_raises(backend):
    z = np.zeros(4)
    with pytest.raises(SingularSystemError):
        backend.solve_tridiagonal(z, z.copy(), z.copy(), np.ones(4))


def reference_upwind(u, vel, inv_vol):
    flux = np.where(vel > 0.0, vel * u[:-1], vel * u[1:])
    full = np.concatenate([[0.0], flux, [0.0]])
    return (full[1:] - full[:-1]) * inv_vol


def test_upwind_divergence_matches_reference(backend, rng):
    n = 50
    u = rng.uniform(0.0, 2.0, n)
    vel = rng.normal(size=n - 1)
    inv_vol = 1.0 / np.full(n, 0.1)
    np.testing.assert_allclose(backend.upwind_divergence(u, vel, inv_vol), reference_upwind(u, vel, inv_vol),
                               rtol=1e-14, atol=1e-14)


def test_upwind_divergence_is_conservative(backend, rng):
    n = 100
    vol = np.full(n, 0.2)
    vol[0] = vol[-1] = 0.1
    u = rng.uniform(0.0, 3.0, n)
    div = backend.upwind_divergence(u, rng.normal(size=n - 1), 1.0 / vol)
    assert abs(np.dot(vol, div)) < 1e-12


def test_logistic_rk4_matches_closed_form(backend):
    n = 1000
    dt = 5.0 / n
    a = np.ones((n, 3))
    b = np.ones((n, 3))
    traj = backend.logistic_rk4(0.1, a, b, dt)
    t = dt * np.arange(n + 1)
    exact = 0.1 * np.exp(t) / (1.0 + 0.1 * (np.exp(t) - 1.0))
    assert traj.shape == (n + 1,)
    assert np.max(np.abs(traj - exact)) < 1e-11


def test_backends_agree(rng):
    mods = kernels.available_backends()
    if len(mods) < 2:
        pytest.skip("compiled kernels not built")
    c, p = mods["cython"], mods["python"]
    lower, diag, upper = random_tridiagonal(rng, 64)
    rhs = rng.normal(size=64)
    np.testing.assert_allclose(c.solve_tridiagonal(lower, diag, upper, rhs),
                               p.solve_tridiagonal(lower, diag, upper, rhs), rtol=1e-14)
    stages = 1.0 + 0.5 * rng.uniform(size=(200, 3))
    np.testing.assert_allclose(c.logistic_rk4(0.3, stages, stages, 0.01),
                               p.logistic_rk4(0.3, stages, stages, 0.01), rtol=1e-14)


def test_pure_python_switch():
    code = "from chemofront import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, CHEMOFRONT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
