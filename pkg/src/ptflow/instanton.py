"""Dilute-instanton-gas estimate of the double-well splitting."""

import math

_SQRT2 = math.sqrt(2.0)


def instanton_gap(lam: float) -> float:
    """Semiclassical gap 2*sqrt(2*sqrt(2)/(pi*lam)) * exp(-1/(3*sqrt(2)*lam)).

    Valid for the m_squared = -1 normalization only, and quantitatively
    reliable only at very small lam.
    """
    if lam <= 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    return 2.0 * math.sqrt(2.0 * _SQRT2 / (math.pi * lam)) * math.exp(-1.0 / (3.0 * _SQRT2 * lam))
