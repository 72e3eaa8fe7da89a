"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise the
pure-numpy implementations take over. Set ``GEEPC_BACKEND=pure`` to force the
fallback (used by the parity tests and the benchmark).
"""

import os

from . import _purekernels

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and os.environ.get("GEEPC_BACKEND", "").lower() != "pure":
    kernels = _compiled
    BACKEND = "compiled"
else:
    kernels = _purekernels
    BACKEND = "pure"


def available_backends() -> dict:
    """Mapping of backend name -> kernel module, for benchmarks and tests."""
    out = {"pure": _purekernels}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
