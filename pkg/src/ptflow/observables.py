"""Physical observables extracted from flow output."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .flow_rhs import SchemeSpec


@dataclass(frozen=True)
class GapEstimate:
    """Energy gap with the flow quantities it was read from."""

    value: float
    scheme: SchemeSpec
    v2_origin: float
    z_origin: float


def gap_from_flow(v2_origin: float, z_origin: float) -> float:
    """Energy gap sqrt(V''(0,0) / Z(0,0)), the renormalized mass of the flow.

    A negative curvature means the flow has not restored convexity yet; the
    gap is undefined there, not zero.
    """
    if z_origin <= 0:
        raise ValueError(f"z_origin must be > 0, got {z_origin}")
    if v2_origin < 0:
        raise ValueError(
            f"gap undefined for v2_origin = {v2_origin} < 0 (potential not convex at origin)"
        )
    return math.sqrt(v2_origin / z_origin)
