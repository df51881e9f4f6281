import numpy as np
import pytest

import inlslab as il
from inlslab.errors import ZeroField

from oracles import (
    CHIRP_VRATE_K025,
    GAUSS_MASS_3D,
    GAUSS_POTENTIAL_B05_S2,
    GAUSS_R2_3D,
    random_bumps,
)


def gaussian(grid, chirp=0.0):
    vals = np.exp(-grid.r**2 / 2)
    if chirp:
        vals = vals * np.exp(1j * chirp * grid.r**2)
    return il.RadialField(grid, vals.astype(complex))


def test_snapshot_gaussian_closed_forms(p_ref, grid_ref):
    s = il.snapshot(grid_ref, p_ref, gaussian(grid_ref))
    assert abs(s.mass - GAUSS_MASS_3D) <= 1e-9
    # the energy form is the 2nd-order flux sum (positivity by construction)
    assert abs(s.h1c_sq - GAUSS_R2_3D) <= 5e-6 * GAUSS_R2_3D
    assert abs(s.potential - GAUSS_POTENTIAL_B05_S2) <= 1e-9
    assert abs(s.variance - GAUSS_R2_3D) <= 1e-9
    assert s.variance_rate == 0.0                     # real field: exact zero


def test_variance_rate_chirped_gaussian(p_ref, grid_ref):
    s = il.snapshot(grid_ref, p_ref, gaussian(grid_ref, chirp=0.25))
    # oracle: 8 kappa int r^2 exp(-r^2) dx (first-derivative identity applied
    # to the quadratic phase); the closed form was cross-checked by adaptive
    # quadrature
    assert abs(s.variance_rate - CHIRP_VRATE_K025) <= 1e-6 * CHIRP_VRATE_K025


def test_snapshot_internal_identities_random(p_ref, grid_ref):
    rng = np.random.default_rng(23)
    p = p_ref
    kappa = (p.d * p.sigma + 2 * p.b) / (2 * (p.sigma + 2))
    a_coef = (p.d * p.sigma + 2 * p.b) / 2.0
    c_coef = (p.d * p.sigma - 4 + 2 * p.b) / 4.0
    for _ in range(25):
        u = il.RadialField(grid_ref, random_bumps(grid_ref, rng, chirped=True))
        s = il.snapshot(grid_ref, p, u)
        scale = max(abs(s.energy), s.h1c_sq)
        assert s.mass >= 0 and s.potential >= 0 and s.variance >= 0
        assert abs(s.energy - (s.h1c_sq / 2 - s.potential / (p.sigma + 2))) <= 1e-10 * scale
        assert abs(s.g_value - (s.h1c_sq - kappa * s.potential)) <= 1e-10 * scale
        assert abs(s.g_value - (a_coef * s.energy - c_coef * s.h1c_sq)) <= 1e-10 * scale


def test_gn_quotient_amplitude_invariance(p_ref, grid_ref, gs_ref):
    q1 = il.gn_quotient(grid_ref, p_ref, gs_ref.profile)
    scaled = il.RadialField(grid_ref, 2.5 * gs_ref.profile.values)
    q2 = il.gn_quotient(grid_ref, p_ref, scaled)
    assert abs(q1 - q2) <= 1e-10 * q1


def test_gn_quotient_attained_at_ground_state(p_ref, grid_ref, gs_ref):
    q = il.gn_quotient(grid_ref, p_ref, gs_ref.profile)
    assert abs(q - gs_ref.gn_constant) <= 1e-6 * gs_ref.gn_constant


def test_gn_quotient_sweep_below_constant(p_ref, grid_ref, gs_ref):
    rng = np.random.default_rng(29)
    for _ in range(50):
        u = il.RadialField(grid_ref, random_bumps(grid_ref, rng))
        q = il.gn_quotient(grid_ref, p_ref, u)
        assert q <= gs_ref.gn_constant * (1 + 1e-6)


def test_gn_quotient_zero_field(p_ref, grid_ref):
    with pytest.raises(ZeroField):
        il.gn_quotient(grid_ref, p_ref, il.RadialField(grid_ref, np.zeros(grid_ref.n)))


def test_uncertainty_gaussian_saturates(p_ref, grid_ref):
    lhs, rhs = il.check_uncertainty(grid_ref, gaussian(grid_ref))
    assert abs(lhs - GAUSS_MASS_3D) <= 1e-9
    assert abs(lhs - rhs) <= 1e-8 * rhs


def test_uncertainty_sweep(p_ref, grid_ref):
    rng = np.random.default_rng(31)
    for _ in range(100):
        u = il.RadialField(grid_ref, random_bumps(grid_ref, rng, chirped=True))
        lhs, rhs = il.check_uncertainty(grid_ref, u)
        assert lhs <= rhs * (1 + 1e-6) + 1e-9


def test_uncertainty_scaling(p_ref, grid_ref):
    rng = np.random.default_rng(37)
    u = il.RadialField(grid_ref, random_bumps(grid_ref, rng))
    l1, r1 = il.check_uncertainty(grid_ref, u)
    l2, r2 = il.check_uncertainty(grid_ref, il.RadialField(grid_ref, 2.0 * u.values))
    assert abs(l2 - 4 * l1) <= 1e-12 * l2
    assert abs(r2 - 4 * r1) <= 1e-12 * r2


def test_momentum_bound_real_field(p_ref, grid_ref, gs_ref):
    lhs, rhs = il.check_momentum_bound(grid_ref, p_ref, gaussian(grid_ref), gs_ref)
    assert lhs == 0.0
    assert rhs >= 0.0


@pytest.mark.parametrize("kappa", [0.1, 0.5, 2.0])
def test_momentum_bound_chirped(p_ref, grid_ref, gs_ref, kappa):
    u = gaussian(grid_ref, chirp=kappa)
    lhs, rhs = il.check_momentum_bound(grid_ref, p_ref, u, gs_ref)
    assert lhs <= rhs * (1 + 1e-6) + 1e-9


def test_momentum_bound_at_ground_state(p_ref, grid_ref, gs_ref):
    lhs, rhs = il.check_momentum_bound(grid_ref, p_ref, gs_ref.profile, gs_ref)
    assert lhs == 0.0
    assert rhs >= -1e-9
