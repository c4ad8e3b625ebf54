"""JIT plumbing for the hot simulation kernels.

Every kernel is written once and runs on two paths: compiled with numba's
``@njit`` (default) or as the plain Python/numpy function when the
``REPQ_DISABLE_JIT`` environment variable is set (or numba is missing).
Both paths draw from the same Mersenne Twister stream -- numba's internal
``np.random`` implementation reproduces numpy's legacy global generator
bit-for-bit given the same seed -- so results are identical either way.
"""

from __future__ import annotations

import os

try:
    import numba as _nb

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    _nb = None
    _HAVE_NUMBA = False


def _flag_set(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


JIT_ENABLED = _HAVE_NUMBA and not _flag_set("REPQ_DISABLE_JIT")


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when JIT is enabled, identity decorator otherwise."""
    if not JIT_ENABLED:
        if args and callable(args[0]):
            return args[0]
        return lambda func: func
    if args and callable(args[0]):
        return _nb.njit(cache=True)(args[0])
    return _nb.njit(*args, **kwargs)
