# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner loop of the relaxation Crank-Nicolson stepper.

One step = complex Thomas solve of the Cayley system fused with the
potential relaxation; the whole multi-step loop runs without touching the
interpreter.  API mirrors inlslab._core_py.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport pow as c_pow

cnp.import_array()


def tridiag_solve(
    cnp.ndarray[cnp.complex128_t, ndim=1] dl,
    cnp.ndarray[cnp.complex128_t, ndim=1] d,
    cnp.ndarray[cnp.complex128_t, ndim=1] du,
    cnp.ndarray[cnp.complex128_t, ndim=1] rhs,
):
    """Thomas solve with subdiagonal dl, diagonal d, superdiagonal du."""
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] x = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cp = np.empty(n, dtype=np.complex128)
    cdef double complex m, piv
    cdef Py_ssize_t i
    piv = d[0]
    cp[0] = du[0] / piv if n > 1 else 0.0
    x[0] = rhs[0] / piv
    for i in range(1, n):
        piv = d[i] - dl[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = du[i] / piv
        x[i] = (rhs[i] - dl[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - cp[i] * x[i + 1]
    return x


def relaxation_steps(
    cnp.ndarray[cnp.complex128_t, ndim=1] W,
    cnp.ndarray[cnp.float64_t, ndim=1] phi,
    cnp.ndarray[cnp.float64_t, ndim=1] cell,
    cnp.ndarray[cnp.float64_t, ndim=1] kd,
    cnp.ndarray[cnp.float64_t, ndim=1] ko,
    cnp.ndarray[cnp.float64_t, ndim=1] gnl,
    double sigma,
    double dt,
    long nsteps,
    bint phi_first=False,
):
    """Advance `nsteps` relaxation Crank-Nicolson steps in place (see _core_py)."""
    cdef Py_ssize_t n = W.shape[0]
    cdef double kap = 0.5 * dt
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] rhs = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] diag = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cp = np.empty(n, dtype=np.complex128)
    cdef double complex off, piv, wl, wc, wr, hd_i
    cdef double hd, amp
    cdef Py_ssize_t i, step
    for step in range(nsteps):
        if phi_first:
            for i in range(n):
                amp = W[i].real * W[i].real + W[i].imag * W[i].imag
                phi[i] = 2.0 * gnl[i] * c_pow(amp, 0.5 * sigma) - phi[i]
        # assemble (cell + i kap H) and rhs = (cell - i kap H) W, H = K - cell*phi
        for i in range(n):
            hd = kd[i] - cell[i] * phi[i]
            diag[i] = cell[i] + 1j * kap * hd
            rhs[i] = (cell[i] - 1j * kap * hd) * W[i]
        for i in range(n - 1):
            off = 1j * kap * ko[i]
            rhs[i] = rhs[i] - off * W[i + 1]
            rhs[i + 1] = rhs[i + 1] - off * W[i]
        # Thomas solve (symmetric off-diagonals i*kap*ko)
        piv = diag[0]
        cp[0] = (1j * kap * ko[0]) / piv
        W[0] = rhs[0] / piv
        for i in range(1, n):
            off = 1j * kap * ko[i - 1]
            piv = diag[i] - off * cp[i - 1]
            if i < n - 1:
                cp[i] = (1j * kap * ko[i]) / piv
            W[i] = (rhs[i] - off * W[i - 1]) / piv
        for i in range(n - 2, -1, -1):
            W[i] = W[i] - cp[i] * W[i + 1]
        if not phi_first:
            for i in range(n):
                amp = W[i].real * W[i].real + W[i].imag * W[i].imag
                phi[i] = 2.0 * gnl[i] * c_pow(amp, 0.5 * sigma) - phi[i]
