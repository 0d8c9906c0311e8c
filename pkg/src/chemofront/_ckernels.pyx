# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

import numpy as np
cimport numpy as cnp

from .errors import SingularSystemError

cnp.import_array()


def solve_tridiagonal(lower, diag, upper, rhs):
    cdef const double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[::1] di = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = di.shape[0]
    cdef Py_ssize_t i
    cdef double pivot
    out = np.empty(n, dtype=np.float64)
    scratch = np.empty(n, dtype=np.float64)
    cdef double[::1] x = out
    cdef double[::1] c = scratch

    pivot = di[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot in tridiagonal elimination at row 0")
    c[0] = up[0] / pivot
    x[0] = r[0] / pivot
    for i in range(1, n):
        pivot = di[i] - lo[i] * c[i - 1]
        if pivot == 0.0:
            raise SingularSystemError(f"zero pivot in tridiagonal elimination at row {i}")
        c[i] = up[i] / pivot if i < n - 1 else 0.0
        x[i] = (r[i] - lo[i] * x[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return out


def upwind_divergence(u, velocity, inv_volume):
    cdef const double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] vel = np.ascontiguousarray(velocity, dtype=np.float64)
    cdef const double[::1] iv = np.ascontiguousarray(inv_volume, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0]
    cdef Py_ssize_t i
    cdef double f_left = 0.0
    cdef double f_right, s
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n - 1):
        s = vel[i]
        f_right = s * uu[i] if s > 0.0 else s * uu[i + 1]
        o[i] = (f_right - f_left) * iv[i]
        f_left = f_right
    o[n - 1] = -f_left * iv[n - 1]
    return out


def logistic_rk4(double u0, a_stages, b_stages, double dt):
    cdef const double[:, ::1] a = np.ascontiguousarray(a_stages, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(b_stages, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k
    cdef double u = u0
    cdef double k1, k2, k3, k4, y
    out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] o = out
    o[0] = u
    for k in range(n):
        k1 = (a[k, 0] - b[k, 0] * u) * u
        y = u + 0.5 * dt * k1
        k2 = (a[k, 1] - b[k, 1] * y) * y
        y = u + 0.5 * dt * k2
        k3 = (a[k, 1] - b[k, 1] * y) * y
        y = u + dt * k3
        k4 = (a[k, 2] - b[k, 2] * y) * y
        u = u + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        o[k + 1] = u
    return out
