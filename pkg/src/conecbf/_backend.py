"""Kernel backend selection.

The compiled extension (conecbf._speedups) is preferred when present;
otherwise the pure Python twin is used. Set CONECBF_KERNEL=pure or
CONECBF_KERNEL=compiled to force a choice (the latter raises if the
extension is missing).
"""

import os

from . import _pykernel

_forced = os.environ.get("CONECBF_KERNEL", "").strip().lower()

if _forced in ("pure", "py", "python"):
    kernel = _pykernel
elif _forced in ("compiled", "c", "ext"):
    from . import _speedups as kernel  # noqa: F401
else:
    try:
        from . import _speedups as kernel  # noqa: F401
    except ImportError:
        kernel = _pykernel


def kernel_backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'pure'."""
    return kernel.backend_name


def available_kernels():
    """All importable kernel modules, pure first."""
    mods = [_pykernel]
    try:
        from . import _speedups

        mods.append(_speedups)
    except ImportError:
        pass
    return mods
