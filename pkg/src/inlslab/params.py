"""Equation parameters and the derived critical exponents.

The model is the focusing inhomogeneous NLS with an inverse-square
potential in d space dimensions,

    i u_t - P_c u + |x|^{-b} |u|^sigma u = 0,   P_c = -Laplacian + c |x|^{-2},

restricted throughout this package to the intercritical range
(4-2b)/d < sigma < (4-2b)/(d-2) with d >= 3, 0 < b < 2 and
c > -((d-2)/2)^2 (the sharp Hardy constant).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    BOutOfRange,
    CouplingBelowHardy,
    DimensionTooSmall,
    SigmaNotIntercritical,
)


@dataclass(frozen=True)
class Params:
    """Validated equation parameters (immutable)."""

    d: int
    b: float
    sigma: float
    c: float

    @property
    def c_crit(self) -> float:
        """Sharp Hardy constant ((d-2)/2)^2; the coupling must satisfy c > -c_crit."""
        return ((self.d - 2) / 2.0) ** 2

    @property
    def sigma_lower(self) -> float:
        return (4.0 - 2.0 * self.b) / self.d

    @property
    def sigma_upper(self) -> float:
        return (4.0 - 2.0 * self.b) / (self.d - 2)


@dataclass(frozen=True)
class DerivedExponents:
    """Scaling exponents derived from validated parameters.

    s_crit is the critical Sobolev index d/2 - (2-b)/sigma; sigma_c is the
    mass/gradient weighting exponent (1-s_crit)/s_crit used in every
    threshold product E*M^sigma_c and |grad|*M^(sigma_c/2).
    """

    c_crit: float
    s_crit: float
    sigma_c: float


def validate(d: int, b: float, sigma: float, c: float) -> Params:
    """Check the parameter restrictions and return an immutable Params.

    Raises DimensionTooSmall, BOutOfRange, SigmaNotIntercritical or
    CouplingBelowHardy naming the violated constraint.  Boundary values are
    rejected: the classification theory requires strict inequalities.
    """
    d = int(d)
    if d < 3:
        raise DimensionTooSmall(f"d = {d}; need d >= 3")
    b = float(b)
    if not (0.0 < b < 2.0):
        raise BOutOfRange(f"b = {b}; need 0 < b < 2")
    sigma = float(sigma)
    lo = (4.0 - 2.0 * b) / d
    hi = (4.0 - 2.0 * b) / (d - 2)
    if not (lo < sigma < hi):
        raise SigmaNotIntercritical(
            f"sigma = {sigma}; intercritical range is ({lo}, {hi}) for d={d}, b={b}"
        )
    c = float(c)
    c_crit = ((d - 2) / 2.0) ** 2
    if not (c > -c_crit):
        raise CouplingBelowHardy(f"c = {c}; need c > -{c_crit}")
    return Params(d=d, b=b, sigma=sigma, c=c)


def derived_exponents(p: Params) -> DerivedExponents:
    """Compute s_crit and sigma_c, asserting the two closed forms agree.

    sigma_c = (1 - s_crit)/s_crit and equivalently
    (4 - 2b - (d-2) sigma)/(d sigma - 4 + 2b); agreement to 1e-12 relative
    is asserted as an internal consistency check.
    """
    d, b, sigma = p.d, p.b, p.sigma
    s_crit = d / 2.0 - (2.0 - b) / sigma
    assert 0.0 < s_crit < 1.0
    sigma_c = (1.0 - s_crit) / s_crit
    denom = d * sigma - 4.0 + 2.0 * b
    numer = 4.0 - 2.0 * b - (d - 2) * sigma
    assert denom > 0.0 and numer > 0.0
    closed = numer / denom
    assert math.isclose(sigma_c, closed, rel_tol=1e-12)
    return DerivedExponents(c_crit=p.c_crit, s_crit=s_crit, sigma_c=sigma_c)


def hardy_sector_exponent(p: Params) -> float:
    """Exponent a of the regular local behaviour u ~ r^a at the origin.

    a solves a(a + d - 2) = c on the branch that is regular for the
    quadratic form; a = 0 when c = 0, a < 0 for c < 0, a > 0 for c > 0.
    """
    return -(p.d - 2) / 2.0 + math.sqrt(p.c_crit + p.c)
