"""Backend selection for the hot numeric kernels.

Set ``MINDRACE_DISABLE_NUMBA=1`` to force the pure-numpy implementations
(useful for debugging and on platforms without numba). The choice is made
once at import; ``use_numba()`` reports it.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("MINDRACE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("disabled by MINDRACE_DISABLE_NUMBA")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _njit = None


def use_numba() -> bool:
    return HAVE_NUMBA


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when available, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
