"""JIT switch.

Set ``FRACAP_DISABLE_JIT=1`` to run every hot kernel through its pure-numpy
implementation instead of the numba one. The flag is read once at import.
"""

import os

_flag = os.environ.get("FRACAP_DISABLE_JIT", "").strip().lower()

try:
    import numba  # noqa: F401

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _HAVE_NUMBA = False

JIT_ENABLED = _HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")

if _HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper
