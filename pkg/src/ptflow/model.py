"""Physical parameters, bare potential and spatial grid for the flow problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Separation of scales required between the UV cutoff and the bare curvature.
_CUTOFF_SCALE_FACTOR = 100.0


@dataclass(frozen=True)
class ModelParams:
    """Bare couplings of the quadratic-plus-quartic oscillator (hbar = 1, unit mass).

    The double well corresponds to ``m_squared < 0``; ``m_squared`` sets the
    energy scale.  ``dimension`` is kept general but all production runs use 1.
    """

    m_squared: float
    lam: float
    cutoff: float = 1500.0
    dimension: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.m_squared):
            raise ValueError("m_squared must be finite")
        if self.lam < 0:
            raise ValueError(f"quartic coupling must be >= 0, got {self.lam}")
        if self.cutoff <= 0:
            raise ValueError(f"cutoff must be > 0, got {self.cutoff}")
        if self.cutoff ** 2 < _CUTOFF_SCALE_FACTOR * abs(self.m_squared):
            raise ValueError(
                f"cutoff^2 = {self.cutoff ** 2:g} too close to |m_squared| = "
                f"{abs(self.m_squared):g}; need cutoff^2 >= {_CUTOFF_SCALE_FACTOR:g}*|m_squared|"
            )


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on [-x_max, x_max] with an odd node count so x = 0 is a node."""

    x_max: float
    n_points: int = 2001

    def __post_init__(self) -> None:
        if self.x_max <= 0:
            raise ValueError(f"x_max must be > 0, got {self.x_max}")
        if self.n_points < 5 or self.n_points % 2 == 0:
            raise ValueError(f"n_points must be odd and >= 5, got {self.n_points}")

    @property
    def h(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)

    @property
    def center(self) -> int:
        """Index of the x = 0 node."""
        return (self.n_points - 1) // 2

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.n_points)


def bare_potential(params: ModelParams, x):
    """Quadratic-plus-quartic potential m_squared*x^2/2 + lam*x^4 (even in x)."""
    x = np.asarray(x, dtype=float)
    v = 0.5 * params.m_squared * x * x + params.lam * x ** 4
    return float(v) if v.ndim == 0 else v


def classical_minima(params: ModelParams) -> list[float]:
    """Locations of the classical minima; {0} unless the potential is a double well."""
    if params.m_squared >= 0 or params.lam == 0:
        return [0.0]
    x_star = math.sqrt(-params.m_squared / (4.0 * params.lam))
    return [-x_star, x_star]


def default_grid(params: ModelParams, n_points: int = 2001) -> SpatialGrid:
    """Grid wide enough that the minima and the inter-minima region sit deep inside.

    Extent max(8, 3*x*) keeps the boundary in the quartic region where the flow
    is exponentially suppressed.
    """
    x_star = max(abs(x) for x in classical_minima(params))
    return SpatialGrid(x_max=max(8.0, 3.0 * x_star), n_points=n_points)
