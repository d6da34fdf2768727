"""Select between numba-compiled kernels and their plain numpy fallback.

Set ``ECOORC_DISABLE_JIT=1`` to run every kernel as ordinary Python. The
fallback is also used when numba cannot be imported.
"""

import os

_disabled = os.environ.get("ECOORC_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _disabled:
        raise ImportError("jit disabled by ECOORC_DISABLE_JIT")
    import numba

    HAS_JIT = True

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

except ImportError:
    HAS_JIT = False

    def njit(*args, **kwargs):
        # bare @njit or @njit(...)
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(func):
            return func

        return wrapper


def py_func(kernel):
    """Return the uncompiled Python function behind a kernel."""
    return getattr(kernel, "py_func", kernel)
