# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-qubit gate kernels.

Hot loops for the state-vector simulator.  The pure-Python twin lives in
``_kernel_py``; ``_kernels`` picks whichever imports.
"""

import numpy as np

cimport numpy as cnp


def apply_1q(cnp.complex128_t[::1] amps, cnp.complex128_t[:, :] u,
             int target, int n):
    """Apply a 2x2 gate to qubit `target` (qubit 0 = MSB) in place."""
    cdef Py_ssize_t stride = 1 << (n - 1 - target)
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t block, base, i1
    cdef double complex a0, a1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1]
    cdef double complex u10 = u[1, 0], u11 = u[1, 1]
    for block in range(0, dim, 2 * stride):
        for base in range(block, block + stride):
            i1 = base + stride
            a0 = amps[base]
            a1 = amps[i1]
            amps[base] = u00 * a0 + u01 * a1
            amps[i1] = u10 * a0 + u11 * a1


def apply_ctrl_1q(cnp.complex128_t[::1] amps, cnp.complex128_t[:, :] u,
                  int target, int n, unsigned long long cmask):
    """Apply a 2x2 gate to `target` on the branch where all cmask bits are 1."""
    cdef Py_ssize_t dim = 1 << n
    cdef unsigned long long tbit = 1ULL << (n - 1 - target)
    cdef Py_ssize_t i0, i1
    cdef double complex a0, a1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1]
    cdef double complex u10 = u[1, 0], u11 = u[1, 1]
    for i0 in range(dim):
        if (<unsigned long long> i0) & tbit:
            continue
        if ((<unsigned long long> i0) & cmask) != cmask:
            continue
        i1 = i0 | tbit
        a0 = amps[i0]
        a1 = amps[i1]
        amps[i0] = u00 * a0 + u01 * a1
        amps[i1] = u10 * a0 + u11 * a1
