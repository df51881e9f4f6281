import math

import numpy as np
import pytest

import inlslab as il
from inlslab.errors import (
    BOutOfRange,
    CouplingBelowHardy,
    DimensionTooSmall,
    SigmaNotIntercritical,
)


def test_valid_reference_parameters():
    p = il.validate(3, 0.5, 2.0, 0.0)
    assert p.c_crit == 0.25
    assert p.sigma_lower < p.sigma < p.sigma_upper


def test_dimension_too_small():
    with pytest.raises(DimensionTooSmall):
        il.validate(2, 0.5, 2.0, 0.0)


@pytest.mark.parametrize("b", [0.0, 2.0, -0.3, 2.5])
def test_b_out_of_range(b):
    with pytest.raises(BOutOfRange):
        il.validate(3, b, 2.0, 0.0)


def test_sigma_above_energy_critical():
    # (4 - 2b)/(d - 2) = 3 for d=3, b=0.5; 3.1 is outside
    with pytest.raises(SigmaNotIntercritical):
        il.validate(3, 0.5, 3.1, 0.0)


@pytest.mark.parametrize("sigma", [1.0, 3.0])
def test_sigma_boundaries_rejected(sigma):
    with pytest.raises(SigmaNotIntercritical):
        il.validate(3, 0.5, sigma, 0.0)


def test_coupling_boundary_is_strict():
    with pytest.raises(CouplingBelowHardy):
        il.validate(3, 1.0, 1.5, -0.25)
    # just inside is fine
    il.validate(3, 1.0, 1.5, -0.2499)


def test_derived_exponents_reference():
    p = il.validate(3, 0.5, 2.0, 0.0)
    ex = il.derived_exponents(p)
    assert math.isclose(ex.s_crit, 0.75, rel_tol=1e-14)
    assert math.isclose(ex.sigma_c, 1.0 / 3.0, rel_tol=1e-12)


def test_derived_exponents_second_case():
    p = il.validate(3, 1.0, 1.5, 0.0)
    ex = il.derived_exponents(p)
    assert math.isclose(ex.s_crit, 5.0 / 6.0, rel_tol=1e-14)
    assert math.isclose(ex.sigma_c, 0.2, rel_tol=1e-12)


def test_sigma_c_two_forms_agree_over_random_parameters():
    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(3, 7))
        b = rng.uniform(0.05, 1.95)
        lo, hi = (4 - 2 * b) / d, (4 - 2 * b) / (d - 2)
        sigma = rng.uniform(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo))
        c = rng.uniform(-0.9, 4.0) * ((d - 2) / 2.0) ** 2
        p = il.validate(d, b, sigma, c)
        ex = il.derived_exponents(p)
        closed = (4 - 2 * b - (d - 2) * sigma) / (d * sigma - 4 + 2 * b)
        assert math.isclose(ex.sigma_c, closed, rel_tol=1e-12)
        assert d * sigma - 4 + 2 * b > 0
        assert 4 - 2 * b - (d - 2) * sigma > 0
        assert ex.sigma_c > 0
