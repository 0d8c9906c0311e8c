"""Screened-Poisson solves ``0 = v_xx - lambda v + mu u`` for the two chemicals.

Every domain in the model imposes zero chemical flux at each of its edges
(the origin for the half-line, the truncation points, and the moving fronts),
so the chemical solve always closes both ends with the ghost-node reflection
``v[-1] = v[1]``.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from . import kernels
from .grid import Grid
from .params import ModelParams


def chemical_operator(n_nodes: int, h: float, lam: float):
    """Diagonals of ``(2 + lam h^2) v_i - v_{i-1} - v_{i+1}`` with reflected ends.

    Returns ``(lower, diag, upper)``; the system ``A v = mu h^2 u`` is the
    dx^2-scaled central-difference discretisation.
    """
    diag = np.full(n_nodes, 2.0 + lam * h * h)
    lower = np.full(n_nodes, -1.0)
    upper = np.full(n_nodes, -1.0)
    lower[0] = 0.0
    upper[-1] = 0.0
    upper[0] = -2.0
    lower[-1] = -2.0
    return lower, diag, upper


def solve_chemical(grid: Grid, u, lam: float, mu: float, *, length: float = 1.0) -> np.ndarray:
    """Second-order finite-difference solution on ``grid``.

    ``length`` rescales the grid (physical spacing ``length * grid.dx``); the
    front-fixed solver passes the current domain length here.
    """
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    u = np.asarray(u, dtype=np.float64)
    h = grid.dx * length
    lower, diag, upper = chemical_operator(grid.n_nodes, h, lam)
    return kernels.solve_tridiagonal(lower, diag, upper, (mu * h * h) * u)


def chemical_gradient(grid: Grid, v, *, length: float = 1.0) -> np.ndarray:
    """Nodal ``v_x``: central differences inside, the imposed zero at zero-flux edges.

    Edges with a Dirichlet condition get the one-sided second-order stencil.
    """
    v = np.asarray(v, dtype=np.float64)
    h = grid.dx * length
    g = np.empty_like(v)
    g[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    g[0] = 0.0 if grid.is_neumann("left") else (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    g[-1] = 0.0 if grid.is_neumann("right") else (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return g


def face_gradient(grid: Grid, v, *, length: float = 1.0) -> np.ndarray:
    """``(v[i+1] - v[i]) / dx`` on the interior faces (second order at the face)."""
    return np.diff(v) / (grid.dx * length)


def _image_kernel(x, z, root_lam, lo, span):
    """Resolvent kernel of ``lambda - d^2/dx^2`` on ``[lo, lo+span]`` with zero flux at both ends.

    Method of images: the free-space kernel ``exp(-r|x-z|) / (2r)`` summed over
    reflections of ``z`` about both edges, truncated once the next image
    contributes below double precision.
    """
    xs = x[:, None] - lo
    zs = z[None, :] - lo
    n_img = int(np.ceil(40.0 / (2.0 * root_lam * span))) + 1
    total = np.zeros((xs.shape[0], zs.shape[1]))
    for n in range(-n_img, n_img + 1):
        shift = 2.0 * n * span
        total += np.exp(-root_lam * np.abs(xs - zs - shift))
        total += np.exp(-root_lam * np.abs(xs + zs - shift))
    return total / (2.0 * root_lam)


def greens_oracle(grid: Grid, u, lam: float, mu: float, *, interp: str = "cubic", n_gauss: int = 6) -> np.ndarray:
    """Evaluate ``v = mu * integral(G(x, z) u(z) dz)`` by Gauss quadrature.

    The time integral of the heat-semigroup representation is collapsed to
    the exponential kernel ``exp(-sqrt(lam)|x-z|) / (2 sqrt(lam))``; the
    Neumann edges enter through image charges (on the half-line the image
    about 0 is exactly the even extension ``u(|z|)``). Nodal data are
    interpolated with a cubic spline (``interp="cubic"``) or linearly. The
    kernel kink sits on cell edges, so per-cell Gauss rules stay accurate.
    Intended for small grids: cost is ``O(n_nodes * n_cells * n_gauss)``.
    """
    u = np.asarray(u, dtype=np.float64)
    x = grid.x
    gp, gw = np.polynomial.legendre.leggauss(n_gauss)
    left = x[:-1]
    half = 0.5 * grid.dx
    z = (left[:, None] + half * (gp[None, :] + 1.0)).ravel()
    w = np.tile(gw * half, grid.n_cells)
    if interp == "cubic":
        uz = CubicSpline(x, u)(z)
    elif interp == "linear":
        uz = np.interp(z, x, u)
    else:
        raise ValueError(f"unknown interpolation {interp!r}")
    root = np.sqrt(lam)
    G = _image_kernel(x, z, root, grid.x_min, grid.x_max - grid.x_min)
    return mu * (G @ (w * uz))


def imbalance(grid: Grid, u, p: ModelParams, *, length: float = 1.0) -> np.ndarray:
    """``chi2 lambda2 v2 - chi1 lambda1 v1`` for the chemicals produced by ``u``.

    Bounded above by ``M * sup(u)`` whenever ``u >= 0``.
    """
    v1 = solve_chemical(grid, u, p.lambda1, p.mu1, length=length)
    v2 = solve_chemical(grid, u, p.lambda2, p.mu2, length=length)
    return p.chi2 * p.lambda2 * v2 - p.chi1 * p.lambda1 * v1


def normalized_difference(grid: Grid, w, p: ModelParams, *, length: float = 1.0) -> np.ndarray:
    """``chi2 mu2 V2 - chi1 mu1 V1`` where ``V_i`` solves ``V'' - lambda_i V + lambda_i w = 0``.

    The normalised resolvents ``V_i`` preserve constants; this is the quantity
    bounded in sup-norm by ``K * sup|w|`` for signed ``w``.
    """
    V1 = solve_chemical(grid, w, p.lambda1, p.lambda1, length=length)
    V2 = solve_chemical(grid, w, p.lambda2, p.lambda2, length=length)
    return p.chi2 * p.mu2 * V2 - p.chi1 * p.mu1 * V1
