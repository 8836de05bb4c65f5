"""numpy fallback for the compiled gate kernels in ``_kernel_cy``.

Same contracts, same in-place semantics; results are bit-identical because
both evaluate the identical complex128 expressions pairwise.
"""

import numpy as np


def apply_1q(amps, u, target, n):
    """Apply a 2x2 gate to qubit `target` (qubit 0 = MSB) in place."""
    psi = amps.reshape(1 << target, 2, -1)
    a0 = psi[:, 0, :].copy()
    a1 = psi[:, 1, :].copy()
    psi[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    psi[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def apply_ctrl_1q(amps, u, target, n, cmask):
    """Apply a 2x2 gate to `target` on the branch where all cmask bits are 1."""
    dim = 1 << n
    tbit = 1 << (n - 1 - target)
    idx = np.arange(dim)
    sel = ((idx & tbit) == 0) & ((idx & cmask) == cmask)
    i0 = idx[sel]
    i1 = i0 | tbit
    a0 = amps[i0]
    a1 = amps[i1]
    amps[i0] = u[0, 0] * a0 + u[0, 1] * a1
    amps[i1] = u[1, 0] * a0 + u[1, 1] * a1
