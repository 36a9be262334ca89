"""Hot numeric kernels with a compiled fast path.

A Cython extension implements the inner loops (fractional-index
interpolation and the shifted-l2 offset sweep); a pure-numpy backend
provides the same operations with bit-identical float64 results.  The
backend is chosen once at import time: the compiled extension when it
is available, otherwise the reference implementation.

Set ``SOUNDFIELD_KERNELS=reference`` or ``=compiled`` to force one
(``compiled`` raises if the extension is missing).
"""

import os

from . import _reference

EDGE_CLAMP = _reference.EDGE_CLAMP
EDGE_ZERO = _reference.EDGE_ZERO

_requested = os.environ.get("SOUNDFIELD_KERNELS", "").strip().lower()

if _requested not in ("", "compiled", "reference"):
    raise ValueError(
        f"SOUNDFIELD_KERNELS={_requested!r}: expected 'compiled' or 'reference'"
    )

if _requested == "reference":
    _impl = _reference
    BACKEND = "reference"
else:
    try:
        from . import _compiled as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _reference
        BACKEND = "reference"

fractional_read = _impl.fractional_read
shift_l2_min_per_segment = _impl.shift_l2_min_per_segment

__all__ = [
    "BACKEND",
    "EDGE_CLAMP",
    "EDGE_ZERO",
    "fractional_read",
    "shift_l2_min_per_segment",
]
