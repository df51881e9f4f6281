"""Pure NumPy/SciPy implementations of the hot evolution kernels.

Matches the API of the compiled extension `inlslab._core`; selected at
import time by `inlslab.core` when the extension is unavailable or when
INLSLAB_PURE_PYTHON=1 is set.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


def tridiag_solve(dl: np.ndarray, d: np.ndarray, du: np.ndarray, rhs: np.ndarray):
    """Solve the tridiagonal system with subdiagonal dl, diagonal d, superdiagonal du."""
    n = d.shape[0]
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = du
    ab[1, :] = d
    ab[2, :-1] = dl
    return solve_banded((1, 1), ab, rhs)


def relaxation_steps(
    W: np.ndarray,
    phi: np.ndarray,
    cell: np.ndarray,
    kd: np.ndarray,
    ko: np.ndarray,
    gnl: np.ndarray,
    sigma: float,
    dt: float,
    nsteps: int,
    phi_first: bool = False,
) -> None:
    """Advance `nsteps` relaxation Crank-Nicolson steps in place.

    One step solves the Cayley system
        (cell + i dt/2 H) W_new = (cell - i dt/2 H) W,   H = K - diag(cell*phi)
    and then relaxes the frozen potential, phi <- 2 gnl |W_new|^sigma - phi.
    With phi_first=True the relaxation happens before the solve, which
    together with a negated dt retraces a forward trajectory exactly.
    """
    n = W.shape[0]
    kap = 0.5 * dt
    ab = np.zeros((3, n), dtype=complex)
    for _ in range(nsteps):
        if phi_first:
            phi[:] = 2.0 * gnl * np.abs(W) ** sigma - phi
        hd = kd - cell * phi
        ab[0, 1:] = 1j * kap * ko
        ab[1, :] = cell + 1j * kap * hd
        ab[2, :-1] = 1j * kap * ko
        rhs = (cell - 1j * kap * hd) * W
        rhs[:-1] -= 1j * kap * ko * W[1:]
        rhs[1:] -= 1j * kap * ko * W[:-1]
        W[:] = solve_banded((1, 1), ab, rhs)
        if not phi_first:
            phi[:] = 2.0 * gnl * np.abs(W) ** sigma - phi
