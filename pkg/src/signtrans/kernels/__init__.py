"""GRU kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
numpy implementation is used.  Set ``SIGNTRANS_KERNELS=python`` to force the
fallback (e.g. for benchmarking), or ``SIGNTRANS_KERNELS=cython`` to make a
missing extension a hard error.
"""

import os

from . import _gru_py

_requested = os.environ.get("SIGNTRANS_KERNELS", "auto").lower()

if _requested in ("auto", "cython", "cy"):
    try:
        from . import _gru_cy as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested != "auto":
            raise
        _impl = _gru_py
        BACKEND = "python"
elif _requested in ("python", "py"):
    _impl = _gru_py
    BACKEND = "python"
else:
    raise ValueError(f"unknown SIGNTRANS_KERNELS value: {_requested!r}")

gru_forward = _impl.gru_forward
gru_backward = _impl.gru_backward


def available_backends() -> dict:
    """Name -> module for every importable backend (used by tests/benchmarks)."""
    out = {"python": _gru_py}
    try:
        from . import _gru_cy
        out["cython"] = _gru_cy
    except ImportError:
        pass
    return out
