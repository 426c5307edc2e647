"""Kernel lane selection.

Two lanes are built from the single kernel source in ``_kernels``:

* ``numba`` -- each kernel wrapped with ``numba.njit``; the default
  whenever numba imports.
* ``pure``  -- the interpreted functions as-is.

Setting the environment variable ``FIXEDPOOL_PURE=1`` forces the pure
lane (and skips importing numba entirely). Callers can also pin a lane
per object via the ``backend=`` argument accepted by the constructors.
"""

import os
from types import SimpleNamespace

from . import _kernels

PURE_ENV = "FIXEDPOOL_PURE"

_KERNEL_NAMES = (
    "alloc_one",
    "dealloc_one",
    "fill_pool",
    "release_pool",
    "bulk_pool",
    "pairs_pool",
    "churn_pool",
    "fill_system",
    "release_system",
    "bulk_system",
    "pairs_system",
    "churn_system",
)

# Kernels calling the libc handles hold ctypes pointers, which numba
# cannot persist to its on-disk cache.
_UNCACHEABLE = {
    "fill_system",
    "release_system",
    "bulk_system",
    "pairs_system",
    "churn_system",
}

pure = SimpleNamespace(
    name="pure", **{name: getattr(_kernels, name) for name in _KERNEL_NAMES}
)

_jit = None
_jit_error = None


def _pure_forced() -> bool:
    return os.environ.get(PURE_ENV, "").strip().lower() in ("1", "true", "yes", "on")


def _build_jit():
    global _jit, _jit_error
    if _jit is not None or _jit_error is not None:
        return _jit
    try:
        import numba
    except ImportError as exc:  # pragma: no cover - numba is a dependency
        _jit_error = exc
        return None
    compiled = {}
    for name in _KERNEL_NAMES:
        fn = getattr(_kernels, name)
        compiled[name] = numba.njit(cache=name not in _UNCACHEABLE, nogil=True)(fn)
    _jit = SimpleNamespace(name="numba", **compiled)
    return _jit


def jit_available() -> bool:
    """True when the compiled lane can be built (regardless of the env flag)."""
    return _build_jit() is not None


def get_backend(name: str | None = None) -> SimpleNamespace:
    """Resolve a kernel lane.

    ``None`` or ``"auto"`` honors the env flag and prefers the compiled
    lane; ``"numba"`` demands it; ``"pure"`` always works.
    """
    if name in (None, "auto"):
        if _pure_forced():
            return pure
        return _build_jit() or pure
    if name in ("numba", "jit"):
        lane = _build_jit()
        if lane is None:
            raise RuntimeError(f"numba lane unavailable: {_jit_error!r}")
        return lane
    if name == "pure":
        return pure
    raise ValueError(f"unknown backend {name!r}; expected 'auto', 'numba' or 'pure'")


def active_backend_name() -> str:
    """Name of the lane ``get_backend(None)`` resolves to right now."""
    return get_backend(None).name
