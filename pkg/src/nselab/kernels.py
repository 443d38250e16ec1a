"""Kernel backend selection.

Prefers the compiled extension when it imported cleanly; otherwise uses
the numpy fallback. Setting NSE_LAB_FORCE_FALLBACK=1 skips the compiled
path, which is how the two implementations are benchmarked and
cross-tested against each other.
"""

import os

_force = os.environ.get("NSE_LAB_FORCE_FALLBACK", "") not in ("", "0")

if _force:
    from . import _kernels_fallback as _impl

    HAVE_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        from . import _kernels_fallback as _impl

        HAVE_COMPILED = False

BACKEND = "compiled" if HAVE_COMPILED else "numpy"

contract_velocity_gradient = _impl.contract_velocity_gradient
convolve_modes = _impl.convolve_modes
