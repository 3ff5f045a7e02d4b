"""Pointwise right-hand sides of the four flow schemes.

Every function returns the scale derivative as k*d/dk (equivalently
d/d ln k); the integrator converts to its own time variable.  The proper-time
family is regulated by an integer index m; its m -> infinity limit is the
exponential flow, and the local-potential scheme is the sharp-cutoff
(Wegner-Houghton) equation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class PositivityViolation(ArithmeticError):
    """The flow left the regulator's domain of validity (non-positive base)."""


class SchemeKind(enum.Enum):
    WEGNER_HOUGHTON = "wh"
    PROPER_TIME_LO = "pt-lo"
    PROPER_TIME_NLO = "pt-nlo"
    PROPER_TIME_FINITE_M = "pt-m"


@dataclass(frozen=True)
class SchemeSpec:
    """Flow-scheme selector; ``m`` is required (and allowed) only for PT-finite-m."""

    kind: SchemeKind
    m: int | None = None

    def __post_init__(self) -> None:
        if self.kind is SchemeKind.PROPER_TIME_FINITE_M:
            if self.m is None or self.m < 1:
                raise ValueError("finite-m scheme needs an integer m >= 1")
        elif self.m is not None:
            raise ValueError(f"scheme {self.kind.value} does not take an m index")

    @property
    def evolves_z(self) -> bool:
        return self.kind in (SchemeKind.PROPER_TIME_NLO, SchemeKind.PROPER_TIME_FINITE_M)

    @property
    def tag(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class PointData:
    """Local field data entering a pointwise RHS evaluation."""

    k: float
    v2: float = 0.0
    v3: float = 0.0
    z: float = 1.0
    z1: float = 0.0
    z2: float = 0.0
    d: float = 1.0

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if self.z <= 0:
            raise ValueError(f"z must be > 0, got {self.z}")


def alpha(m: int, d: float) -> float:
    """Prefactor Gamma(m+1-d/2) / ((4 pi)^(d/2) Gamma(m+1)) of the finite-m flow."""
    if m < 1 or m != int(m):
        raise ValueError(f"m must be a positive integer, got {m}")
    if m + 1 - d / 2 <= 0:
        raise ValueError(f"gamma pole: m+1-d/2 = {m + 1 - d / 2} must be > 0")
    # lgamma keeps this finite for the large m used in the limit checks.
    return math.exp(math.lgamma(m + 1 - d / 2) - math.lgamma(m + 1)) / (4.0 * math.pi) ** (d / 2)


def _bracket_coeff(d: float) -> float:
    return 4.0 + 18.0 * d - d * d


def pt_finite_m_fields(k, v2, v3, z, z1, z2, d: float, m: int):
    """Vectorized finite-m flow: (k dV/dk, k dZ/dk) on arrays of field data."""
    kk = k * k
    zk2 = z * kk
    u = v2 / (m * zk2)
    if np.any(u <= -1.0):
        raise PositivityViolation(
            f"z*k^2 + v2/m <= 0 at k = {k:g} (min 1 + v2/(m z k^2) = {float(np.min(1.0 + u)):g})"
        )
    p = m + 1.0 - d / 2.0
    base = zk2 + v2 / m
    # (z k^2 / base)^p via log1p: p is large for large m and the ratio is near 1.
    pref = alpha(m, d) * (kk * m) ** (d / 2.0) * np.exp(-p * np.log1p(u))
    t1 = (p / (m * base)) * (-z2 + _bracket_coeff(d) * z1 * z1 / (24.0 * z))
    t2 = ((10.0 - d) * p * (m + 2.0 - d / 2.0) / (6.0 * m * m * base * base)) * z1 * v3
    t3 = -(p * (m + 2.0 - d / 2.0) * (m + 3.0 - d / 2.0) / (6.0 * m ** 3 * base ** 3)) * z * v3 * v3
    return pref, pref * (t1 + t2 + t3)


def pt_inf_dv_fields(k, v2, z, d: float):
    """Vectorized m -> infinity potential flow k dV/dk; underflow decays to 0."""
    with np.errstate(under="ignore", over="ignore"):
        return (k * k / (4.0 * math.pi)) ** (d / 2.0) * np.exp(-v2 / (z * k * k))


def pt_inf_fields(k, v2, v3, z, z1, z2, d: float):
    """Vectorized m -> infinity flow: (k dV/dk, k dZ/dk) on arrays of field data."""
    kk = k * k
    zk2 = z * kk
    with np.errstate(under="ignore", over="ignore"):
        pref = (kk / (4.0 * math.pi)) ** (d / 2.0) * np.exp(-v2 / zk2)
        bracket = (
            -z2 / zk2
            + _bracket_coeff(d) * z1 * z1 / (24.0 * z * z * kk)
            + (10.0 - d) * z1 * v3 / (6.0 * zk2 * zk2)
            - z * v3 * v3 / (6.0 * zk2 ** 3)
        )
        return pref, pref * bracket


def wh_dv_fields(k, v2):
    """Vectorized Wegner-Houghton potential flow k dV/dk (D = 1, Z frozen)."""
    arg = 1.0 + v2 / (k * k)
    if np.any(arg <= 0.0):
        raise PositivityViolation(
            f"1 + v2/k^2 <= 0 at k = {k:g} (min = {float(np.min(arg)):g})"
        )
    return (-k / (2.0 * math.pi)) * np.log(arg)


def rhs_pt_m(p: PointData, m: int) -> tuple[float, float]:
    """Finite-m proper-time flow at one point: (k dV/dk, k dZ/dk)."""
    if m < 1 or m != int(m):
        raise ValueError(f"m must be a positive integer, got {m}")
    dv, dz = pt_finite_m_fields(p.k, p.v2, p.v3, p.z, p.z1, p.z2, p.d, int(m))
    return float(dv), float(dz)


def rhs_pt_inf(p: PointData) -> tuple[float, float]:
    """m -> infinity proper-time flow at one point: (k dV/dk, k dZ/dk)."""
    dv, dz = pt_inf_fields(p.k, p.v2, p.v3, p.z, p.z1, p.z2, p.d)
    return float(dv), float(dz)


def rhs_wh(p: PointData) -> tuple[float, float]:
    """Wegner-Houghton local potential flow at one point; Z never runs."""
    return float(wh_dv_fields(p.k, p.v2)), 0.0
