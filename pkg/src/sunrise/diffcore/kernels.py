"""Kernel backend selection.

The compiled extension is used when it imports and ``SUNRISE_PURE_PYTHON`` is
unset or ``0``; otherwise the numpy fallback is used. ``BACKEND`` names the
active choice.
"""

import os

from . import _kernels_py

_want_pure = os.environ.get("SUNRISE_PURE_PYTHON", "0") not in ("", "0")

try:
    if _want_pure:
        raise ImportError("pure-python backend requested")
    from . import _kernels as _impl
    BACKEND = "compiled"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

dense_forward = _impl.dense_forward
dense_backward = _impl.dense_backward
adam_update = _impl.adam_update
polyak = _impl.polyak

__all__ = ["BACKEND", "dense_forward", "dense_backward", "adam_update", "polyak"]
