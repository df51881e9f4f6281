"""Regime classification of initial data against the ground-state thresholds.

The decision tree compares three scale-invariant products of the data with
the corresponding ground-state values: the energy-mass product against
energy_mass_threshold, the gradient-mass product against
grad_mass_threshold, and the potential-mass product against the same
product at the ground state.  Below the threshold the gradient comparison
decides global existence versus blow-up; at the threshold (within a
configurable relative band) the trichotomy applies; above it the
variance-based convexity conditions decide, when their hypotheses hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import EmptyTrajectory, MissingVariance
from .evolution import Trajectory
from .functionals import InvariantSnapshot, snapshot
from .grid import RadialField
from .ground_state import GroundStateBundle


class DataSymmetry(Enum):
    """Declared symmetry/decay class of the initial data.

    The declaration is about the mathematical datum the samples represent;
    it upgrades blow-up conclusions (finite variance or radial symmetry, or
    cylindrical symmetry when sigma <= 2) and gates the above-threshold
    branch (which requires finite variance).
    """

    FINITE_VARIANCE = "finite_variance"
    RADIAL = "radial"
    CYLINDRICAL = "cylindrical_sigma_d"
    GENERAL = "general"


class Regime(Enum):
    BELOW_GLOBAL = "below_global"
    BELOW_BLOWUP = "below_blowup"
    AT_GLOBAL = "at_global"
    AT_SOLITON = "at_soliton"
    AT_BLOWUP_SIDE = "at_blowup_side"
    ABOVE_GLOBAL = "above_global"
    ABOVE_BLOWUP = "above_blowup"
    INDETERMINATE = "indeterminate"


class BlowupStrength(Enum):
    FINITE_TIME = "finite_time"
    UNBOUNDED_OR_FINITE_TIME = "unbounded_or_finite_time"
    NONE = "none"


@dataclass(frozen=True)
class ThresholdAnalysis:
    """Scalars of the variance-convexity argument for one datum.

    x0 is the unique minimizer of the barrier function f on (-inf, 16E];
    the closed form 16E - 16 E_G (M_G/M)^{sigma_c} is cross-checked against
    f'(x0) = 0 and f(x0) = x0/8 at construction.
    """

    x0: float
    f_at_x0: float
    fprime_at_x0: float
    sixteen_e: float
    energy_product_ge_threshold: bool   # equivalent to x0 >= 0
    momentum_condition: bool            # z'(0)^2 >= x0/2  (variance-rate form)


@dataclass(frozen=True)
class Classification:
    regime: Regime
    theorem_tag: str
    blowup_conclusion_strength: BlowupStrength
    certificates: dict
    equality_band: float


def _barrier(p, gn_constant, mass, energy):
    """f(x) and f'(x) of the variance-convexity barrier, as closures."""
    A = p.d * p.sigma + 2.0 * p.b
    B = 4.0 - 2.0 * p.b - (p.d - 2) * p.sigma
    denom = 2.0 * A - 8.0                     # 2(d sigma + 2b - 4)
    beta = 4.0 / A
    scale = (p.sigma + 2.0) / (2.0 * denom)   # (sigma+2)/(4(d sigma + 2b - 4))
    cfac = gn_constant**beta * mass ** (B / A)

    def f(x):
        core = (scale * (16.0 * energy - x)) ** beta / cfac
        return -x / denom + (2.0 * A) * energy / (A - 4.0) - core

    def fprime(x):
        core = beta * scale**beta * (16.0 * energy - x) ** (beta - 1.0) / cfac
        return -1.0 / denom + core

    return f, fprime


def threshold_x0(
    snap: InvariantSnapshot, gs: GroundStateBundle, tol: float = 1e-8
) -> ThresholdAnalysis:
    """Closed-form x0 with its defining identities verified numerically.

    Asserts f'(x0) ~ 0 and f(x0) = x0/8 to the given relative tolerance;
    reports the two equivalences used by the above-threshold test: the
    energy product exceeding its threshold iff x0 >= 0, and the composite
    variance condition iff z'(0)^2 >= x0/2 with z = sqrt(V).
    """
    p = gs.params
    mass, energy = snap.mass, snap.energy
    x0 = 16.0 * energy - 16.0 * gs.energy * (gs.mass / mass) ** gs.sigma_c
    f, fprime = _barrier(p, gs.gn_constant, mass, energy)
    fp0 = fprime(x0)
    f0 = f(x0)
    scale_fp = abs(1.0 / (2.0 * (p.d * p.sigma + 2.0 * p.b - 4.0)))
    assert abs(fp0) <= tol * scale_fp, f"f'(x0) = {fp0:.3e} not ~ 0"
    scale_f = max(abs(x0) / 8.0, abs(energy), 1e-12)
    assert abs(f0 - x0 / 8.0) <= tol * scale_f, f"f(x0) - x0/8 = {f0 - x0 / 8.0:.3e}"
    zsq = snap.variance_rate**2 / (4.0 * snap.variance) if snap.variance > 0 else 0.0
    return ThresholdAnalysis(
        x0=float(x0),
        f_at_x0=float(f0),
        fprime_at_x0=float(fp0),
        sixteen_e=16.0 * energy,
        energy_product_ge_threshold=bool(x0 >= 0.0),
        momentum_condition=bool(zsq >= x0 / 2.0),
    )


def threshold_x0_by_rootfinding(
    snap: InvariantSnapshot, gs: GroundStateBundle
) -> float:
    """Locate x0 as the root of f' by bracketed root-finding (cross-check)."""
    p = gs.params
    _, fprime = _barrier(p, gs.gn_constant, snap.mass, snap.energy)
    hi = 16.0 * snap.energy
    width = max(abs(hi), abs(gs.energy) * 16.0, 1.0)
    lo = hi - width
    while fprime(lo) > 0.0:
        width *= 4.0
        lo = hi - width
    eps = 1e-14 * max(1.0, abs(hi))
    upper = hi - eps
    while fprime(upper) < 0.0:
        eps *= 0.5
        upper = hi - eps
    return float(brentq(fprime, lo, upper, xtol=1e-14, rtol=1e-15))


def classify(
    u0: RadialField,
    gs: GroundStateBundle,
    sym: DataSymmetry = DataSymmetry.RADIAL,
    equality_band: float = 1e-6,
) -> Classification:
    """Evaluate the regime of initial data with numeric certificates.

    Certificates are the three threshold ratios plus the variance scalars;
    equality with a threshold is declared inside a relative band (default
    1e-6) since exact equality has measure zero numerically.  Above the
    threshold, finite variance must be declared (MissingVariance otherwise);
    when no hypothesis set applies, the regime is INDETERMINATE.
    """
    grid = gs.grid
    p = gs.params
    snap = snapshot(grid, p, u0, 0.0)
    sc = gs.sigma_c
    energy_prod = snap.energy * snap.mass**sc
    grad_prod = math.sqrt(snap.h1c_sq) * snap.mass ** (sc / 2.0)
    pot_prod = snap.potential * snap.mass**sc

    e_cert = energy_prod / gs.energy_mass_threshold
    g_cert = grad_prod / gs.grad_mass_threshold
    p_cert = pot_prod / (gs.potential * gs.mass**sc)

    real_data = bool(np.all(u0.values.imag == 0.0))
    vrate = 0.0 if real_data else snap.variance_rate
    analysis = threshold_x0(snap, gs)
    zsq = vrate**2 / (4.0 * snap.variance) if snap.variance > 0 else 0.0

    certificates = {
        "energy_mass_ratio": e_cert,
        "grad_mass_ratio": g_cert,
        "potential_mass_ratio": p_cert,
        "variance": snap.variance,
        "variance_rate": vrate,
        "x0": analysis.x0,
        "z_rate_sq": zsq,
        "x0_half": analysis.x0 / 2.0,
        "mass": snap.mass,
        "energy": snap.energy,
    }

    sym_grants_finite_time = sym in (DataSymmetry.FINITE_VARIANCE, DataSymmetry.RADIAL) or (
        sym is DataSymmetry.CYLINDRICAL and p.sigma <= 2.0
    )

    at_energy = abs(e_cert - 1.0) <= equality_band
    at_grad = abs(g_cert - 1.0) <= equality_band

    if not at_energy and e_cert < 1.0:
        tag = "below-threshold dichotomy"
        if at_grad:
            return Classification(Regime.INDETERMINATE, tag, BlowupStrength.NONE,
                                  certificates, equality_band)
        if g_cert < 1.0:
            return Classification(Regime.BELOW_GLOBAL, tag, BlowupStrength.NONE,
                                  certificates, equality_band)
        strength = (
            BlowupStrength.FINITE_TIME
            if sym_grants_finite_time
            else BlowupStrength.UNBOUNDED_OR_FINITE_TIME
        )
        return Classification(Regime.BELOW_BLOWUP, tag, strength,
                              certificates, equality_band)

    if at_energy:
        tag = "at-threshold trichotomy"
        if at_grad:
            return Classification(Regime.AT_SOLITON, tag, BlowupStrength.NONE,
                                  certificates, equality_band)
        if g_cert < 1.0:
            return Classification(Regime.AT_GLOBAL, tag, BlowupStrength.NONE,
                                  certificates, equality_band)
        strength = (
            BlowupStrength.NONE
            if sym_grants_finite_time
            else BlowupStrength.UNBOUNDED_OR_FINITE_TIME
        )
        return Classification(Regime.AT_BLOWUP_SIDE, tag, strength,
                              certificates, equality_band)

    # above the threshold: variance-convexity conditions
    tag = "above-threshold variance convexity"
    if sym is not DataSymmetry.FINITE_VARIANCE:
        raise MissingVariance(
            "above-threshold classification requires declared finite variance"
        )
    if not analysis.momentum_condition:
        return Classification(Regime.INDETERMINATE, tag, BlowupStrength.NONE,
                              certificates, equality_band)
    if p_cert < 1.0 and vrate >= 0.0:
        return Classification(Regime.ABOVE_GLOBAL, tag, BlowupStrength.NONE,
                              certificates, equality_band)
    if p_cert > 1.0 and vrate <= 0.0:
        return Classification(Regime.ABOVE_BLOWUP, tag, BlowupStrength.FINITE_TIME,
                              certificates, equality_band)
    return Classification(Regime.INDETERMINATE, tag, BlowupStrength.NONE,
                          certificates, equality_band)


@dataclass(frozen=True)
class TrajectoryReport:
    """Certified-so-far global/blow-up criteria along a computed trajectory."""

    sup_potential_ratio: float      # sup_t P(u) M(u)^sc / (P_G M_G^sc)
    potential_criterion_held: bool  # sup < 1: bounded-potential global criterion
    sup_g_value: float              # sup_t G(u(t))
    delta_certificate: float        # largest delta with G <= -delta (0 if none)
    negative_virial_held: bool
    label: str


def trajectory_criteria(traj: Trajectory, gs: GroundStateBundle) -> TrajectoryReport:
    """Evaluate the trajectory-wise global/blow-up criteria.

    Reports the sup of the potential-mass product against the ground-state
    value (global-existence criterion: staying strictly below certifies
    boundedness so far) and the largest delta with G(u(t)) <= -delta
    throughout (negative-virial blow-up criterion).
    """
    if not traj.snapshots:
        raise EmptyTrajectory("trajectory has no snapshots")
    sc = gs.sigma_c
    ref = gs.potential * gs.mass**sc
    ratios = [s.potential * s.mass**sc / ref for s in traj.snapshots]
    gvals = [s.g_value for s in traj.snapshots]
    sup_ratio = float(max(ratios))
    sup_g = float(max(gvals))
    held_pot = sup_ratio < 1.0
    delta = -sup_g if sup_g < 0.0 else 0.0
    held_g = delta > 0.0
    if held_pot and not held_g:
        label = "bounded-potential criterion certified so far"
    elif held_g and not held_pot:
        label = "negative-virial criterion certified so far"
    elif held_pot and held_g:
        label = "both criteria certified so far"
    else:
        label = "neither"
    return TrajectoryReport(
        sup_potential_ratio=sup_ratio,
        potential_criterion_held=held_pot,
        sup_g_value=sup_g,
        delta_certificate=float(delta),
        negative_virial_held=held_g,
        label=label,
    )
