"""fixedpool: O(1) fixed-size memory pool with a self-hosted free list.

The pool threads its free list through the unused blocks themselves and
links blocks in lazily, so create, allocate, and deallocate are all
loop-free. On top of the core sit a guard/leak debug layer, in-place
grow/shrink, a multi-pool hybrid with system-allocator fallback, and a
benchmark CLI (``bench``).

Hot kernels run compiled with numba by default; set ``FIXEDPOOL_PURE=1``
to force the interpreted fallback lane.
"""

from ._backend import PURE_ENV, active_backend_name, get_backend, jit_available
from .core import (
    INDEX_BYTES,
    MAX_BLOCK_COUNT,
    BlockRef,
    Pool,
    PoolConfig,
    PoolStats,
    Region,
)
from .debug import (
    DEFAULT_GUARD_PATTERN,
    DEFAULT_GUARD_SIZE,
    AllocationRecord,
    DebugPool,
    GuardConfig,
    GuardViolation,
)
from .errors import (
    AlignmentError,
    ComparisonError,
    DoubleFreeError,
    GrowUnsupportedError,
    GuardCorruptionError,
    OutOfRangeError,
    PoolConfigError,
    PoolError,
    PoolStateError,
    RoutingError,
    ShrinkBlockedError,
)
from .multipool import MultiPool, MultiPoolConfig, MultiPoolStats
from .resize import grow, high_water_mark, shrink

__version__ = "0.1.0"

__all__ = [
    "AllocationRecord",
    "AlignmentError",
    "BlockRef",
    "ComparisonError",
    "DEFAULT_GUARD_PATTERN",
    "DEFAULT_GUARD_SIZE",
    "DebugPool",
    "DoubleFreeError",
    "GrowUnsupportedError",
    "GuardConfig",
    "GuardCorruptionError",
    "GuardViolation",
    "INDEX_BYTES",
    "MAX_BLOCK_COUNT",
    "MultiPool",
    "MultiPoolConfig",
    "MultiPoolStats",
    "OutOfRangeError",
    "Pool",
    "PoolConfig",
    "PoolConfigError",
    "PoolError",
    "PoolStateError",
    "PoolStats",
    "PURE_ENV",
    "Region",
    "RoutingError",
    "ShrinkBlockedError",
    "active_backend_name",
    "get_backend",
    "grow",
    "high_water_mark",
    "jit_available",
    "shrink",
]
