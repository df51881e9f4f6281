"""Virial machinery: localized weights, rate/acceleration identities, checks.

The second-derivative identity for the variance,
d^2/dt^2 int |x|^2 |u|^2 dx = 8 G(u), is evaluated term by term through the
general weighted formula, so instantiating the weight at |x|^2 reproduces
8 G(u) from shared quadrature building blocks, while localized weights give
the R-truncated version whose remainder vanishes on compactly concentrated
fields.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CutoffInfeasible, InsufficientSnapshots, SizeMismatch
from .evolution import Trajectory
from .grid import RadialField, RadialGrid, integrate, mapped_midpoints, momentum_density, to_w
from .params import Params


def _theta_pieces(rho: np.ndarray):
    """Branch values of the localizer profile theta and derivatives.

    theta(rho) = rho^2 on [0,1], (rho-2)^2 on [1,2], 0 beyond.  This is the
    unique profile matching the quadratic core and compact support with
    curvature <= 2 away from the matching corner (any smooth bridge provably
    overshoots the curvature bound; the corner at rho=1 carries the negative
    singular part, which is admissible).  Third derivative vanishes on every
    branch.
    """
    theta = np.where(rho <= 1.0, rho**2, np.where(rho < 2.0, (rho - 2.0) ** 2, 0.0))
    dtheta = np.where(rho <= 1.0, 2.0 * rho, np.where(rho < 2.0, 2.0 * (rho - 2.0), 0.0))
    d2theta = np.where(rho <= 1.0, 2.0, np.where(rho < 2.0, 2.0, 0.0))
    return theta, dtheta, d2theta


@dataclass(frozen=True)
class VirialCutoff:
    """Sampled localized weight phi_R(r) = R^2 theta(r/R) and its derivatives."""

    R: float
    grid: RadialGrid
    phi: np.ndarray
    dphi: np.ndarray      # phi'
    d2phi: np.ndarray     # phi''
    lap: np.ndarray       # Laplacian of phi
    bilap: np.ndarray     # bi-Laplacian of phi
    d2phi_mid: np.ndarray  # phi'' at interval midpoints (for the Hessian term)
    dphi_over_r: np.ndarray
    d3phi: np.ndarray

    kind = "cutoff"


@dataclass(frozen=True)
class ExactWeight:
    """The weight |x|^2 in the same sampled format as a cutoff."""

    grid: RadialGrid
    kind = "exact"

    @property
    def phi(self):
        return self.grid.r**2

    @property
    def dphi(self):
        return 2.0 * self.grid.r

    @property
    def d2phi(self):
        return np.full(self.grid.n, 2.0)

    @property
    def lap(self):
        return np.full(self.grid.n, 2.0 * self.grid.params.d)

    @property
    def bilap(self):
        return np.zeros(self.grid.n)

    @property
    def d2phi_mid(self):
        return np.full(self.grid.n - 1, 2.0)

    @property
    def dphi_over_r(self):
        return np.full(self.grid.n, 2.0)

    @property
    def d3phi(self):
        return np.zeros(self.grid.n)


def build_cutoff(R: float, grid: RadialGrid) -> VirialCutoff:
    """Build the localized weight and verify its pointwise inequalities.

    Checks at every node: the quadratic core and the vanishing tail branch
    values, and the three sign conditions 2 - phi'' >= 0, 2 - phi'/r >= 0,
    2d - Lap(phi) >= 0.  Violations raise CutoffInfeasible.
    """
    if R <= 1.0:
        raise CutoffInfeasible(f"R = {R}; need R > 1")
    d = grid.params.d
    r = grid.r
    rho = r / R
    theta, dtheta, d2theta = _theta_pieces(rho)
    phi = R**2 * theta
    dphi = R * dtheta
    d2phi = d2theta
    with np.errstate(divide="ignore", invalid="ignore"):
        dphi_over_r = np.where(rho > 0, dtheta / rho, 2.0)
    lap = d2phi + (d - 1) * dphi_over_r
    # bi-Laplacian: zero on the core and tail; 4(d-1)(d-3)/(R^2 rho^3) on the bridge
    bridge = (rho > 1.0) & (rho < 2.0)
    bilap = np.zeros(grid.n)
    bilap[bridge] = 4.0 * (d - 1) * (d - 3) / (R**2 * rho[bridge] ** 3)
    rho_mid = 0.5 * (rho[:-1] + rho[1:])
    _, _, d2_mid = _theta_pieces(rho_mid)
    d3phi = np.zeros(grid.n)

    cut = VirialCutoff(
        R=float(R), grid=grid, phi=phi, dphi=dphi, d2phi=d2phi, lap=lap,
        bilap=bilap, d2phi_mid=d2_mid, dphi_over_r=dphi_over_r, d3phi=d3phi,
    )
    tol = 1e-12
    core = rho <= 1.0
    if not np.allclose(phi[core], r[core] ** 2, rtol=0, atol=1e-12 * R**2):
        raise CutoffInfeasible("core branch is not r^2")
    tail = rho >= 2.0
    if np.any(phi[tail] != 0.0):
        raise CutoffInfeasible("tail branch is not 0")
    if np.any(2.0 - d2phi < -tol):
        raise CutoffInfeasible("curvature bound 2 - phi'' >= 0 violated")
    if np.any(2.0 - dphi_over_r < -tol):
        raise CutoffInfeasible("slope bound 2 - phi'/r >= 0 violated")
    if np.any(2.0 * d - lap < -tol):
        raise CutoffInfeasible("Laplacian bound 2d - Lap phi >= 0 violated")
    return cut


def virial_rate(
    grid: RadialGrid, p: Params, u: RadialField, weight
) -> float:
    """dV_phi/dt = 2 int phi'(r) Im(conj(u) u_r) dx.

    With the exact weight this is identical (same sums) to the snapshot's
    variance_rate.  Exactly zero for real fields.
    """
    if u.values.shape != (grid.n,):
        raise SizeMismatch("field does not match grid")
    d = grid.params.d
    r_mid, dens = momentum_density(grid, u.values)
    if weight.kind == "exact":
        dphi_mid = 2.0 * r_mid
    else:
        rho_mid = r_mid / weight.R
        _, dtheta_mid, _ = _theta_pieces(rho_mid)
        dphi_mid = weight.R * dtheta_mid
    h = grid.meta["h"]
    return float(2.0 * grid.sphere_area * h
                 * np.sum(dphi_mid * r_mid ** (d - 1) * dens))


def virial_acceleration(
    grid: RadialGrid, p: Params, u: RadialField, weight
) -> float:
    """d^2 V_phi / dt^2 evaluated term by term for the given weight.

    Terms: bi-Laplacian, Hessian contraction (for radial fields
    4 int phi'' |u_r|^2 dx), the inverse-square potential term
    4c int (phi'/r^3)|u|^2 dx, and the two nonlinear terms with Lap(phi) and
    phi'/r.  The Hessian and potential terms are evaluated jointly in the
    substituted variable, where their singular parts cancel analytically:

        4 int phi''|u_r|^2 + c (phi'/r^3)|u|^2 dx
          = 4 int phi'' |W'|^2 r_eff-measure + S_phi(r) |W|^2 r^{2a+d-3} dr,
        S_phi = a(a+d-2)(phi'/r - phi'') - a phi''' r.

    S_phi vanishes identically for the exact weight and on the quadratic
    core of every cutoff, so the exact-weight acceleration reproduces
    8 G(u) from the same sums the snapshot uses.
    """
    if u.values.shape != (grid.n,):
        raise SizeMismatch("field does not match grid")
    vals = u.values
    d = p.d
    a = grid.alpha
    sphere = grid.sphere_area
    W = to_w(grid, vals)

    t_bilap = -integrate(grid, weight.bilap * np.abs(vals) ** 2).real

    # Hessian term in the substituted variable (shares kint with h1c_sq)
    dW2 = np.abs(np.diff(W)) ** 2
    t_hess = 4.0 * sphere * np.sum(weight.d2phi_mid * grid.kint * dW2)

    # combined singular remainder, vanishes when c == 0 or on r^2 branches
    if a != 0.0:
        s_phi = a * (a + d - 2.0) * (weight.dphi_over_r - weight.d2phi) \
            - a * weight.d3phi * grid.r
        dens = s_phi * np.abs(W) ** 2 * grid.r ** (2.0 * a - 2.0)
        t_sing = 4.0 * sphere * np.sum(grid.w * dens)
    else:
        t_sing = 0.0

    nl_common = grid.r ** (-p.b) * np.abs(vals) ** (p.sigma + 2.0)
    t_nl1 = -(2.0 * p.sigma / (p.sigma + 2.0)) * integrate(grid, weight.lap * nl_common).real
    t_nl2 = -(4.0 * p.b / (p.sigma + 2.0)) * integrate(
        grid, weight.dphi_over_r * nl_common
    ).real
    return float(t_bilap + t_hess + t_sing + t_nl1 + t_nl2)


@dataclass(frozen=True)
class VirialConsistencyReport:
    times: np.ndarray
    v_second_fd: np.ndarray
    eight_g: np.ndarray
    acc_mismatch: float         # max |FD of V - 8G|
    acc_mismatch_rms: float     # rms over interior times of the same
    rate_mismatch: float        # max |FD of V - recorded V'|
    dt_snapshot: float
    n_used: int


def check_virial_consistency(traj: Trajectory) -> VirialConsistencyReport:
    """Compare finite differences of the recorded variance against 8G and V'.

    Uses the longest uniformly spaced initial run of snapshots (adaptive
    stepping breaks uniformity once blow-up tracking starts); requires at
    least 5.  Central second differences of V(t) are compared with 8 G(u(t))
    and central first differences with the recorded variance rate; both
    mismatches shrink as dt^2 under refinement.
    """
    snaps = traj.snapshots
    if len(snaps) < 5:
        raise InsufficientSnapshots(f"need >= 5 snapshots, have {len(snaps)}")
    times = np.array([s.t for s in snaps])
    steps = np.diff(times)
    dt0 = steps[0]
    uniform_end = len(steps)
    for i, st in enumerate(steps):
        if abs(st - dt0) > 1e-9 * dt0:
            uniform_end = i
            break
    n_uniform = uniform_end + 1
    if n_uniform < 5:
        raise InsufficientSnapshots(
            f"longest uniform snapshot run has {n_uniform} points; need >= 5"
        )
    sel = slice(0, n_uniform)
    t = times[sel]
    v = np.array([s.variance for s in snaps[sel]])
    vr = np.array([s.variance_rate for s in snaps[sel]])
    g8 = 8.0 * np.array([s.g_value for s in snaps[sel]])
    d2 = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / dt0**2
    d1 = (v[2:] - v[:-2]) / (2.0 * dt0)
    acc_mis = float(np.max(np.abs(d2 - g8[1:-1])))
    acc_rms = float(np.sqrt(np.mean((d2 - g8[1:-1]) ** 2)))
    rate_mis = float(np.max(np.abs(d1 - vr[1:-1])))
    return VirialConsistencyReport(
        times=t[1:-1],
        v_second_fd=d2,
        eight_g=g8[1:-1],
        acc_mismatch=acc_mis,
        acc_mismatch_rms=acc_rms,
        rate_mismatch=rate_mis,
        dt_snapshot=float(dt0),
        n_used=n_uniform,
    )


def subsample_trajectory(traj: Trajectory, stride: int) -> Trajectory:
    """Trajectory restricted to every stride-th snapshot (for FD refinement
    studies of the consistency check)."""
    from dataclasses import replace

    return replace(
        traj,
        snapshots=traj.snapshots[::stride],
        dts=traj.dts[::stride],
        field_dumps=[],
    )
