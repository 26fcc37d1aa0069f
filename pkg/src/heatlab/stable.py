"""Numerically stable evaluation of exponential ratio coefficients.

The curvature-dependent constants in the bound formulas all reduce to the
ratio (e^u - 1)/u, which loses every significant digit near u = 0 if computed
literally.  A short series takes over below |u| = 1e-4, matching the analytic
limits to well under 1e-12 there.
"""

from __future__ import annotations

import math

_SERIES_CUTOFF = 1e-4


def expm1_ratio(u: float) -> float:
    """(e^u - 1) / u, continuously extended by 1 at u = 0."""
    if abs(u) < _SERIES_CUTOFF:
        return 1.0 + u / 2.0 + u * u / 6.0 + u * u * u / 24.0
    return math.expm1(u) / u


def inv_one_minus_exp_neg(u: float) -> float:
    """u / (1 - e^{-u}), continuously extended by 1 at u = 0."""
    if abs(u) < _SERIES_CUTOFF:
        # Series of u / (1 - e^{-u}) = 1 + u/2 + u^2/12 - u^4/720 + ...
        return 1.0 + u / 2.0 + u * u / 12.0
    return u / (-math.expm1(-u))
