"""Exception types shared across the pool layers."""


class PoolError(Exception):
    """Base class for all fixedpool errors."""


class PoolConfigError(PoolError, ValueError):
    """Invalid pool or tier geometry."""


class PoolStateError(PoolError, RuntimeError):
    """Operation on a destroyed pool."""


class OutOfRangeError(PoolError, ValueError):
    """Address or index outside the pool's region."""


class AlignmentError(PoolError, ValueError):
    """Address inside the region but not on a block boundary."""


class DoubleFreeError(PoolError):
    """Release of a block that is not currently live."""


class GuardCorruptionError(PoolError):
    """Guard bytes around a payload no longer hold the guard pattern."""

    def __init__(self, block_index, tag, side):
        self.block_index = block_index
        self.tag = tag
        self.side = side
        super().__init__(f"corruption block={block_index} tag={tag} side={side}")


class RoutingError(PoolError):
    """Address owned by no tier and absent from the fallback registry."""


class GrowUnsupportedError(PoolError):
    """No in-place capacity behind the region to grow into."""


class ShrinkBlockedError(PoolError):
    """Shrink would cut blocks at or below the initialization frontier."""


class ComparisonError(PoolError):
    """Benchmark reports do not cover the same cells."""
