"""Hot-kernel backend selection.

The compiled extension is preferred when present; the numpy fallback is used
otherwise.  ``SLICESIM_KERNELS=py`` forces the fallback (used by the kernel
benchmark and the backend-parity tests), ``SLICESIM_KERNELS=c`` makes a
missing extension a hard error.
"""

import os

_choice = os.environ.get("SLICESIM_KERNELS", "auto").lower()
if _choice not in ("auto", "c", "py"):
    raise RuntimeError(f"SLICESIM_KERNELS must be auto|c|py, got {_choice!r}")

BACKEND = "py"
if _choice in ("auto", "c"):
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        from . import _purekernels as _impl
else:
    from . import _purekernels as _impl

best_fit_pick = _impl.best_fit_pick
add_and_check = _impl.add_and_check
check_subset = _impl.check_subset
greedy_pick = _impl.greedy_pick


def backends():
    """Both backends, for parity tests and benchmarks: {name: module}."""
    out = {}
    from . import _purekernels

    out["py"] = _purekernels
    try:
        from . import _speedups  # type: ignore[attr-defined]

        out["c"] = _speedups
    except ImportError:
        pass
    return out
