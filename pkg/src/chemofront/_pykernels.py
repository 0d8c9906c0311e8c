"""Reference implementations of the hot loops in plain Python/NumPy.

These are used when the compiled ``_ckernels`` extension is unavailable and
serve as the comparison baseline in the benchmark and the backend tests.
"""

import numpy as np

from .errors import SingularSystemError


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas elimination for ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``.

    ``lower[0]`` and ``upper[-1]`` are ignored. Inputs are not modified.
    """
    n = len(diag)
    c = [0.0] * n
    d = [0.0] * n
    lo = lower.tolist() if hasattr(lower, "tolist") else list(lower)
    di = diag.tolist() if hasattr(diag, "tolist") else list(diag)
    up = upper.tolist() if hasattr(upper, "tolist") else list(upper)
    r = rhs.tolist() if hasattr(rhs, "tolist") else list(rhs)

    pivot = di[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot in tridiagonal elimination at row 0")
    c[0] = up[0] / pivot
    d[0] = r[0] / pivot
    for i in range(1, n):
        pivot = di[i] - lo[i] * c[i - 1]
        if pivot == 0.0:
            raise SingularSystemError(f"zero pivot in tridiagonal elimination at row {i}")
        c[i] = up[i] / pivot if i < n - 1 else 0.0
        d[i] = (r[i] - lo[i] * d[i - 1]) / pivot

    x = [0.0] * n
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return np.array(x, dtype=np.float64)


def upwind_divergence(u, velocity, inv_volume):
    """Divergence of the upwinded face flux ``F = velocity * u_upwind``.

    ``velocity`` lives on the ``n - 1`` interior faces; the two boundary faces
    carry zero flux. Returns ``(F[i+1/2] - F[i-1/2]) * inv_volume[i]``.
    """
    u = np.asarray(u, dtype=np.float64)
    velocity = np.asarray(velocity, dtype=np.float64)
    flux = np.where(velocity > 0.0, velocity * u[:-1], velocity * u[1:])
    out = np.empty_like(u)
    out[0] = flux[0]
    out[1:-1] = flux[1:] - flux[:-1]
    out[-1] = -flux[-1]
    return out * inv_volume


def logistic_rk4(u0, a_stages, b_stages, dt):
    """Classical RK4 for ``u' = (a(t) - b(t) u) u``.

    ``a_stages`` and ``b_stages`` have shape ``(n_steps, 3)`` holding the
    coefficient at the start, midpoint and end of each step. Returns the
    trajectory of length ``n_steps + 1``.
    """
    a_st = np.asarray(a_stages, dtype=np.float64)
    b_st = np.asarray(b_stages, dtype=np.float64)
    n = a_st.shape[0]
    out = np.empty(n + 1)
    u = float(u0)
    out[0] = u
    for k in range(n):
        a0, am, a1 = a_st[k]
        b0, bm, b1 = b_st[k]
        k1 = (a0 - b0 * u) * u
        y = u + 0.5 * dt * k1
        k2 = (am - bm * y) * y
        y = u + 0.5 * dt * k2
        k3 = (am - bm * y) * y
        y = u + dt * k3
        k4 = (a1 - b1 * y) * y
        u = u + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[k + 1] = u
    return out
