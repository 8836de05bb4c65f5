"""Kernel selection: compiled Cython extension if available, numpy otherwise.

Set QLAB_KERNEL=python to force the fallback (used by the benchmark and the
kernel-equivalence tests).
"""

import os

_forced = os.environ.get("QLAB_KERNEL", "").lower()

if _forced == "python":
    from qlab import _kernel_py as _impl

    KERNEL_BACKEND = "python"
else:
    try:
        from qlab import _kernel_cy as _impl

        KERNEL_BACKEND = "cython"
    except ImportError:
        from qlab import _kernel_py as _impl

        KERNEL_BACKEND = "python"

apply_1q = _impl.apply_1q
apply_ctrl_1q = _impl.apply_ctrl_1q
