"""In-place pool resizing.

Growing only updates the header: the new blocks sit behind the frontier
and get linked into the free chain lazily by subsequent allocations,
exactly like the original tail of the pool. It requires reserve
capacity behind the region (``Pool.create(reserve_block_count=...)``),
since the base address must not move.

Shrinking truncates never-initialized blocks above the high-water mark.
Cutting any deeper would require walking the free chain to unlink
scattered entries, which this design rules out.
"""

from ._kernels import HDR_BLOCK_COUNT, HDR_FREE, HDR_INIT, HDR_NEXT
from .core import MAX_BLOCK_COUNT, Pool
from .errors import GrowUnsupportedError, PoolConfigError, ShrinkBlockedError


def grow(pool: Pool, new_block_count: int) -> None:
    """Extend the pool to ``new_block_count`` blocks in place.

    Existing blocks keep their addresses and contents. If the pool was
    exhausted, the free-chain head is repaired to the frontier so
    allocation can resume.
    """
    pool._require_live()
    header = pool._header
    count = int(header[HDR_BLOCK_COUNT])
    if new_block_count <= count:
        raise ValueError(
            f"grow needs a block count above {count}, got {new_block_count}"
        )
    if new_block_count > MAX_BLOCK_COUNT:
        raise PoolConfigError(
            f"block_count {new_block_count} does not fit a 32-bit index"
        )
    region = pool._region
    needed = new_block_count * pool.block_size_bytes
    if needed > region.max_length:
        raise GrowUnsupportedError(
            f"no in-place capacity: need {needed} bytes, reserved {region.max_length}"
        )
    header[HDR_BLOCK_COUNT] = new_block_count
    header[HDR_FREE] += new_block_count - count
    if header[HDR_NEXT] == -1:
        header[HDR_NEXT] = header[HDR_INIT]
    region.current_length = needed


def shrink(pool: Pool, new_block_count: int) -> None:
    """Cut the pool down to ``new_block_count`` blocks in place.

    Only blocks at or above the initialization frontier can go: they
    were never handed out nor linked, so the live blocks and the free
    chain are untouched.
    """
    pool._require_live()
    header = pool._header
    count = int(header[HDR_BLOCK_COUNT])
    if not 1 <= new_block_count <= count:
        raise ValueError(
            f"shrink needs a block count in [1, {count}], got {new_block_count}"
        )
    init = int(header[HDR_INIT])
    if new_block_count < init:
        raise ShrinkBlockedError(
            f"cannot shrink to {new_block_count}: blocks up to the high-water "
            f"mark {init} may be live or linked into the free chain"
        )
    header[HDR_BLOCK_COUNT] = new_block_count
    header[HDR_FREE] -= count - new_block_count
    if header[HDR_FREE] == 0:
        # The head can only have pointed at the now-truncated frontier.
        header[HDR_NEXT] = -1
    pool._region.current_length = new_block_count * pool.block_size_bytes


def high_water_mark(pool: Pool) -> int:
    """Peak extent of ever-initialized blocks; the safe shrink floor.

    Monotone nondecreasing over the pool's lifetime.
    """
    return pool.initialized_count
