"""Truncated uniform grids and the state carried on them."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import NotEvenError

NEUMANN = "neumann_zero"
DIRICHLET = "dirichlet_zero"
ARTIFICIAL = "artificial_neumann"
_BCS = (NEUMANN, DIRICHLET, ARTIFICIAL)
_KINDS = ("half_line", "whole_line", "reference_unit")


@dataclass(frozen=True)
class Grid:
    """Vertex-centred uniform grid with ``n_cells + 1`` nodes.

    Node ``i`` sits at ``x_min + i * dx``. Each node owns the control volume
    ``[x_i - dx/2, x_i + dx/2]`` clipped to the domain, so edge nodes own half
    a cell; this is what makes the ghost-node Neumann closure conservative.
    """

    kind: str
    x_min: float
    x_max: float
    n_cells: int
    left_bc: str
    right_bc: str

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.left_bc not in _BCS or self.right_bc not in _BCS:
            raise ValueError(f"unknown boundary condition in ({self.left_bc!r}, {self.right_bc!r})")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.kind == "half_line" and (self.x_min != 0.0 or self.left_bc != NEUMANN):
            raise ValueError("half_line grids start at 0 with a zero-Neumann left edge")
        if self.kind == "reference_unit" and (self.x_min, self.x_max) != (0.0, 1.0):
            raise ValueError("reference_unit grids span [0, 1]")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @cached_property
    def x(self) -> np.ndarray:
        # per-index evaluation, no cumulative sums
        return self.x_min + np.arange(self.n_nodes, dtype=np.float64) * self.dx

    @cached_property
    def volumes(self) -> np.ndarray:
        vol = np.full(self.n_nodes, self.dx)
        vol[0] = vol[-1] = 0.5 * self.dx
        return vol

    def integrate(self, u: np.ndarray) -> float:
        """Trapezoidal mass ``sum(volumes * u)``."""
        return float(np.dot(self.volumes, u))

    def is_neumann(self, side: str) -> bool:
        bc = self.left_bc if side == "left" else self.right_bc
        return bc in (NEUMANN, ARTIFICIAL)


def make_grid(
    kind: str,
    x_max: Optional[float] = None,
    n_cells: int = 400,
    *,
    left_bc: Optional[str] = None,
    right_bc: Optional[str] = None,
) -> Grid:
    """Construct a half-line ``[0, x_max]``, whole-line ``[-x_max, x_max]`` or reference ``[0, 1]`` grid.

    Boundary overrides are only meaningful for ``reference_unit`` grids, whose
    edge conditions depend on whether one or two fronts are tracked (default:
    Neumann at 0, Dirichlet at 1).
    """
    if int(n_cells) != n_cells or n_cells < 8:
        raise ValueError(f"n_cells must be an integer >= 8, got {n_cells!r}")
    n_cells = int(n_cells)
    if kind == "reference_unit":
        return Grid(kind, 0.0, 1.0, n_cells, left_bc or NEUMANN, right_bc or DIRICHLET)
    if x_max is None or not x_max > 0.0:
        raise ValueError(f"x_max must be positive, got {x_max!r}")
    x_max = float(x_max)
    if kind == "half_line":
        return Grid(kind, 0.0, x_max, n_cells, NEUMANN, right_bc or ARTIFICIAL)
    if kind == "whole_line":
        return Grid(kind, -x_max, x_max, n_cells, left_bc or ARTIFICIAL, right_bc or ARTIFICIAL)
    raise ValueError(f"unknown grid kind {kind!r}")


@dataclass
class StateField:
    t: float
    u: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    def copy(self) -> "StateField":
        return replace(self, u=self.u.copy(), v1=self.v1.copy(), v2=self.v2.copy())


def restrict_even(grid: Grid, state: StateField, tol: float = 1e-10):
    """Restrict an even whole-line field to ``x >= 0``.

    Returns ``(half_grid, half_state)``. Raises :class:`NotEvenError` if any of
    ``u, v1, v2`` deviates from its mirror image by more than ``tol``.
    """
    if grid.kind != "whole_line" or grid.n_cells % 2:
        raise ValueError("restrict_even needs a whole_line grid with an even number of cells")
    for name in ("u", "v1", "v2"):
        arr = getattr(state, name)
        gap = float(np.max(np.abs(arr - arr[::-1])))
        if gap > tol:
            raise NotEvenError(f"field {name} is not even (max asymmetry {gap:.3e} > {tol:.1e})")
    mid = grid.n_cells // 2
    half = make_grid("half_line", grid.x_max, mid, right_bc=grid.right_bc)
    out = StateField(state.t, state.u[mid:].copy(), state.v1[mid:].copy(), state.v2[mid:].copy())
    return half, out


def even_extension(grid: Grid, state: StateField):
    """Inverse of :func:`restrict_even`: mirror a half-line field onto ``[-x_max, x_max]``."""
    if grid.kind != "half_line":
        raise ValueError("even_extension needs a half_line grid")
    whole = make_grid("whole_line", grid.x_max, 2 * grid.n_cells, right_bc=grid.right_bc, left_bc=grid.right_bc)

    def mirror(a):
        return np.concatenate([a[:0:-1], a])

    return whole, StateField(state.t, mirror(state.u), mirror(state.v1), mirror(state.v2))
