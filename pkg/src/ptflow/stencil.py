"""Finite-difference spatial derivatives of gridded fields.

Interior nodes use 5-point central stencils: fourth-order accurate for the
first and second derivative, second-order for the third.  The two nodes at
each edge fall back to one-sided stencils of the same order of accuracy.
Every stencil is exact on polynomials up to degree 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SpatialGrid

MIN_POINTS = 7


@dataclass
class Field:
    """Samples of a scalar function on the nodes of a SpatialGrid."""

    values: np.ndarray
    grid: SpatialGrid

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                f"field has {self.values.shape} values for a {self.grid.n_points}-node grid"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")


def fornberg_weights(x0: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Weights of the finite-difference approximation to d^order/dx^order at x0.

    Classic recursive construction on arbitrary nodes; used here to build the
    one-sided edge stencils so they share one code path with their tests.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if order >= n:
        raise ValueError("need more nodes than the derivative order")
    w = np.zeros((n, order + 1))
    w[0, 0] = 1.0
    c1 = 1.0
    for i in range(1, n):
        c2 = 1.0
        last_row = w[i - 1].copy()  # needed before the in-place sweep touches it
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            for m in range(min(i, order), -1, -1):
                prev = w[j, m - 1] if m > 0 else 0.0
                w[j, m] = ((nodes[i] - x0) * w[j, m] - m * prev) / c3
        for m in range(min(i, order), -1, -1):
            prev = last_row[m - 1] if m > 0 else 0.0
            w[i, m] = (c1 / c2) * (m * prev - (nodes[i - 1] - x0) * last_row[m])
        c1 = c2
    return w[:, order]


# Interior 5-point stencils (unit spacing; divide by h**order on use).
_CENTRAL = {
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    3: np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0,
}

# Node offsets of the one-sided rows at the left edge (rows 0 and 1); the
# right edge mirrors these with a (-1)**order sign flip, which keeps the
# derivative of an even field exactly even/odd.
_EDGE_OFFSETS = {
    1: (np.arange(0, 5), np.arange(-1, 4)),
    2: (np.arange(0, 6), np.arange(-1, 5)),
    3: (np.arange(0, 5), np.arange(-1, 4)),
}

_EDGE_WEIGHTS = {
    order: tuple(fornberg_weights(0.0, offs.astype(float), order) for offs in _EDGE_OFFSETS[order])
    for order in (1, 2, 3)
}


def apply_stencil(values: np.ndarray, h: float, order: int) -> np.ndarray:
    """Derivative of order 1, 2 or 3 of node samples with spacing h (raw arrays)."""
    if order not in _CENTRAL:
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    n = values.shape[0]
    if n < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} grid points, got {n}")
    out = np.empty_like(values)
    c = _CENTRAL[order]
    out[2:-2] = (
        c[0] * values[:-4]
        + c[1] * values[1:-3]
        + c[2] * values[2:-2]
        + c[3] * values[3:-1]
        + c[4] * values[4:]
    )
    sign = -1.0 if order % 2 else 1.0
    for row, (offs, w) in enumerate(zip(_EDGE_OFFSETS[order], _EDGE_WEIGHTS[order])):
        out[row] = w @ values[row + offs]
        out[n - 1 - row] = sign * (w @ values[n - 1 - row - offs])
    out /= h ** order
    return out


def derivative(field: Field, order: int) -> Field:
    """Spatial derivative of a field; exact (to rounding) on polynomials up to x^4."""
    return Field(apply_stencil(field.values, field.grid.h, order), field.grid)
