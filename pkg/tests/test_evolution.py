import math

import numpy as np
import pytest

import inlslab as il
from inlslab.errors import ConfigInvalid
from inlslab.evolution import ReversibleStepper


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        il.EvolutionConfig(dt=-1.0).validate()
    with pytest.raises(ConfigInvalid):
        il.EvolutionConfig(dt=1e-3, min_dt=1e-2).validate()
    with pytest.raises(ConfigInvalid):
        il.EvolutionConfig(blowup_growth_factor=0.5).validate()
    il.EvolutionConfig().validate()


def test_mass_exact_per_step(p_ref, grid_evolve, gs_evolve):
    st = ReversibleStepper(grid_evolve, p_ref, gs_evolve.profile)
    m0 = il.integrate(grid_evolve, np.abs(st.field().values) ** 2).real
    st.forward(1e-3, 200)
    m1 = il.integrate(grid_evolve, np.abs(st.field().values) ** 2).real
    assert abs(m1 - m0) <= 1e-12 * m0


def test_soliton_short_horizon(p_ref, gs_evolve):
    # within the orbit-instability horizon the discrete steady state is held
    # to splitting accuracy
    cfg = il.EvolutionConfig(dt=1e-3, t_final=0.5, snapshot_stride=25)
    err = il.soliton_error(gs_evolve, cfg)
    assert err["modulus_error"] <= 1e-4
    assert err["phase_error"] <= 1e-3
    assert err["mass_drift"] <= 1e-10
    assert err["energy_drift"] <= 1e-8


def test_soliton_error_zero_horizon(gs_evolve):
    cfg = il.EvolutionConfig(dt=1e-3, t_final=0.0, snapshot_stride=10)
    err = il.soliton_error(gs_evolve, cfg)
    assert err["modulus_error"] == 0.0
    assert err["phase_error"] == 0.0


def test_energy_drift_second_order(p_ref, grid_evolve, gs_evolve):
    """Energy drift of a dispersive run contracts ~4x per dt halving.

    Smooth invariants converge at the scheme's formal second order; the
    field itself converges at first order in L^2 here because the
    inhomogeneity imprints limited temporal regularity near the origin
    (verified separately against a fully iterated midpoint integrator,
    which shows the same first-order field rate).
    """
    u0 = il.rescale_data(gs_evolve.profile, 0.9, "amplitude")
    drifts = []
    for dt in (2.5e-4, 1.25e-4):
        cfg = il.EvolutionConfig(dt=dt, t_final=2.0, snapshot_stride=100,
                                 boundary_mass_limit=1.0)
        traj = il.evolve(u0, p_ref, grid_evolve, cfg)
        drifts.append(traj.energy_drift)
    ratio = drifts[0] / drifts[1]
    assert 3.0 <= ratio <= 5.0


def test_orbit_instability_rate_matches_linear_analysis(p_ref, gs_evolve):
    """The modulus error departs exponentially at the linearized rate.

    For these parameters the linearization about the profile has an
    unstable eigenvalue near 34/time-unit (dense eigensolve, grid-converged);
    the nonlinear run must show the same e-folding once the rounding-seeded
    mode emerges.  This pins the departure seen in longer runs to physics,
    not to the integrator.
    """
    cfg = il.EvolutionConfig(dt=1e-3, t_final=0.9, snapshot_stride=50)
    err = il.soliton_error(gs_evolve, cfg)
    series = [(t, e) for t, e in err["series"] if 1e-10 < e < 1e-3]
    assert len(series) >= 3
    (t0, e0), (t1, e1) = series[0], series[-1]
    rate = math.log(e1 / e0) / (t1 - t0)
    assert 25.0 <= rate <= 45.0


def test_completed_run_09Q(p_ref, grid_evolve, gs_evolve):
    u0 = il.rescale_data(gs_evolve.profile, 0.9, "amplitude")
    cfg = il.EvolutionConfig(dt=1.25e-4, t_final=2.0, snapshot_stride=200,
                             boundary_mass_limit=1.0)
    traj = il.evolve(u0, p_ref, grid_evolve, cfg)
    assert traj.status.kind == "completed"
    assert traj.mass_drift <= 1e-8
    assert traj.energy_drift <= 1e-6
    assert il.detect_blowup(traj, cfg).kind == "completed"


def test_soliton_run_completes(p_ref, grid_evolve, gs_evolve):
    cfg = il.EvolutionConfig(dt=1e-3, t_final=2.0, snapshot_stride=100,
                             boundary_mass_limit=1.0)
    traj = il.evolve(gs_evolve.profile, p_ref, grid_evolve, cfg)
    assert traj.status.kind == "completed"
    assert traj.mass_drift <= 1e-8


def test_boundary_guard_triggers(p_ref, grid_evolve, gs_evolve):
    # dispersing data reaches the outer shell; the default budget flags it
    u0 = il.rescale_data(gs_evolve.profile, 0.9, "amplitude")
    cfg = il.EvolutionConfig(dt=1e-3, t_final=5.0, snapshot_stride=100,
                             boundary_mass_limit=1e-6)
    traj = il.evolve(u0, p_ref, grid_evolve, cfg)
    assert traj.status.kind == "boundary_contaminated"
    assert traj.status.t is not None


def test_blowup_detected_11Q(p_ref, grid_blowup, gs_blowup):
    u0 = il.rescale_data(gs_blowup.profile, 1.1, "amplitude")
    cfg = il.EvolutionConfig(dt=1e-3, t_final=3.0, snapshot_stride=5,
                             blowup_growth_factor=3.0, min_dt=1e-8,
                             boundary_mass_limit=1.0)
    traj = il.evolve(u0, p_ref, grid_blowup, cfg)
    assert traj.status.kind == "blowup_detected"
    assert traj.dt_floor_hit
    growth = traj.snapshots[-1].h1c_sq / traj.snapshots[0].h1c_sq
    assert growth >= 9.0
    assert traj.mass_drift <= 1e-10
    assert il.detect_blowup(traj, cfg).kind == "blowup_detected"
    # the extrapolated collapse time is an order-of-magnitude estimate only:
    # the linear fit of 1/norm assumes a faster norm divergence than the
    # intercritical rate, so it biases late
    assert traj.t_star_estimate is not None
    assert traj.status.t <= traj.t_star_estimate <= traj.status.t * 3.0


def test_resolution_exhausted_at_unreachable_growth(p_ref, grid_blowup, gs_blowup):
    u0 = il.rescale_data(gs_blowup.profile, 1.1, "amplitude")
    cfg = il.EvolutionConfig(dt=1e-3, t_final=3.0, snapshot_stride=5,
                             blowup_growth_factor=100.0, min_dt=1e-8,
                             boundary_mass_limit=1.0)
    traj = il.evolve(u0, p_ref, grid_blowup, cfg)
    assert traj.status.kind == "resolution_exhausted"
    assert il.detect_blowup(traj, cfg).kind == "resolution_exhausted"


def test_time_reversal_dispersive_data(p_ref, grid_evolve, gs_evolve):
    u0 = il.rescale_data(gs_evolve.profile, 0.9, "amplitude")
    st = ReversibleStepper(grid_evolve, p_ref, u0)
    st.forward(1e-3, 500)
    st.backward(1e-3, 500)
    diff = st.field().values - u0.values
    l2 = math.sqrt(il.integrate(grid_evolve, np.abs(diff) ** 2).real)
    assert l2 <= 1e-8


def test_time_reversal_soliton_short(p_ref, grid_evolve, gs_evolve):
    st = ReversibleStepper(grid_evolve, p_ref, gs_evolve.profile)
    st.forward(1e-3, 200)
    st.backward(1e-3, 200)
    diff = st.field().values - gs_evolve.profile.values
    l2 = math.sqrt(il.integrate(grid_evolve, np.abs(diff) ** 2).real)
    assert l2 <= 1e-8


def test_stiffness_guard_reduces_dt(p_ref):
    # a grid reaching far smaller radii makes the inner potential exceed the
    # guard threshold at dt = 1e-3, forcing automatic reductions
    from inlslab.grid import GridMapping

    g = il.build_grid(p_ref, 1024, 20.0, GridMapping("log", 1e-4))
    gs = il.solve_ground_state(p_ref, g)
    cfg = il.EvolutionConfig(dt=1e-3, t_final=0.01, snapshot_stride=10,
                             boundary_mass_limit=1.0)
    traj = il.evolve(gs.profile, p_ref, g, cfg)
    assert traj.guard_reductions >= 1
    assert traj.dts[0] < 1e-3
