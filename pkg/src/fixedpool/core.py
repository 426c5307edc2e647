"""Fixed-size block pool.

A pool carves one contiguous byte region into ``block_count`` blocks of
``block_size_bytes`` each and hands them out in O(1) with no loops and
no per-block metadata: every free block stores the 4-byte index of the
next free block inside itself, and blocks are linked into that chain
lazily, one per allocation, so creating a pool touches no block at all.

Bookkeeping lives in a fixed-size int64 header (see ``_kernels``), so
the footprint is constant no matter how many blocks the pool holds.

Pools are single-threaded: callers must not run two operations on the
same pool concurrently. Distinct pools are fully independent.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._backend import get_backend
from ._kernels import (
    HDR_BLOCK_COUNT,
    HDR_BLOCK_SIZE,
    HDR_FREE,
    HDR_INIT,
    HDR_NEXT,
    HDR_SLOTS,
)
from .errors import AlignmentError, OutOfRangeError, PoolConfigError, PoolStateError

INDEX_BYTES = 4
MAX_BLOCK_COUNT = 2**32 - 1  # free-list links are 4-byte indices
_MAX_REGION_BYTES = 2**63 - 1


@dataclass(frozen=True)
class PoolConfig:
    """Pool geometry: how big each block is and how many there are."""

    block_size_bytes: int
    block_count: int

    def __post_init__(self):
        if self.block_size_bytes < INDEX_BYTES:
            raise PoolConfigError(
                f"block_size_bytes must be >= {INDEX_BYTES} so a free block "
                f"can hold the next-free index, got {self.block_size_bytes}"
            )
        if self.block_count < 1:
            raise PoolConfigError(f"block_count must be >= 1, got {self.block_count}")
        if self.block_count > MAX_BLOCK_COUNT:
            raise PoolConfigError(
                f"block_count {self.block_count} does not fit a 32-bit index"
            )
        if self.block_size_bytes * self.block_count > _MAX_REGION_BYTES:
            raise PoolConfigError("region size overflows size arithmetic")

    @property
    def region_bytes(self) -> int:
        return self.block_size_bytes * self.block_count


class BlockRef(NamedTuple):
    """Handle to one allocated block."""

    index: int
    address: int


@dataclass(frozen=True)
class PoolStats:
    """Snapshot of a pool's counters."""

    block_count: int
    free_count: int
    initialized_count: int
    block_size_bytes: int


class Region:
    """Byte region backing a pool.

    ``max_length`` bytes are reserved up front so the pool can grow in
    place later; only ``current_length`` bytes are part of the pool's
    geometry. The base address never changes. ``block_writes`` counts
    4-byte index writes into blocks, for instrumentation; creation
    performs none.
    """

    __slots__ = ("buf", "max_length", "current_length", "block_writes")

    def __init__(self, current_length: int, max_length: int):
        # np.empty reserves without touching the pages, which keeps
        # creation free of per-block work.
        self.buf = np.empty(max_length, dtype=np.uint8)
        self.max_length = max_length
        self.current_length = current_length
        self.block_writes = 0

    @property
    def start(self) -> int:
        return self.buf.ctypes.data


class Pool:
    """The allocator. Build instances with :meth:`create`."""

    __slots__ = ("_region", "_header", "_kernels")

    def __init__(self, region, header, kernels):
        self._region = region
        self._header = header
        self._kernels = kernels

    @classmethod
    def create(
        cls,
        config: PoolConfig,
        *,
        reserve_block_count: Optional[int] = None,
        backend: Optional[str] = None,
    ) -> "Pool":
        """Obtain the region and set up the header; touches no block.

        ``reserve_block_count`` reserves address space behind the region
        so :func:`fixedpool.resize.grow` can extend the pool in place.
        """
        reserve = config.block_count if reserve_block_count is None else reserve_block_count
        if reserve < config.block_count:
            raise PoolConfigError(
                f"reserve_block_count {reserve} is below block_count {config.block_count}"
            )
        if reserve > MAX_BLOCK_COUNT:
            raise PoolConfigError(f"reserve_block_count {reserve} does not fit a 32-bit index")
        if config.block_size_bytes * reserve > _MAX_REGION_BYTES:
            raise PoolConfigError("reserved region size overflows size arithmetic")
        region = Region(config.region_bytes, config.block_size_bytes * reserve)
        header = np.empty(HDR_SLOTS, dtype=np.int64)
        header[HDR_BLOCK_SIZE] = config.block_size_bytes
        header[HDR_BLOCK_COUNT] = config.block_count
        header[HDR_FREE] = config.block_count
        header[HDR_INIT] = 0
        header[HDR_NEXT] = 0  # head at block 0; its link appears on first allocate
        return cls(region, header, get_backend(backend))

    def destroy(self) -> None:
        """Release the region. Idempotent; any other use afterwards raises."""
        self._region = None
        self._header = None

    def __enter__(self) -> "Pool":
        return self

    def __exit__(self, *exc) -> None:
        self.destroy()

    def _require_live(self):
        if self._region is None:
            raise PoolStateError("pool has been destroyed")

    # -- geometry ------------------------------------------------------

    @property
    def block_size_bytes(self) -> int:
        self._require_live()
        return int(self._header[HDR_BLOCK_SIZE])

    @property
    def block_count(self) -> int:
        self._require_live()
        return int(self._header[HDR_BLOCK_COUNT])

    @property
    def free_count(self) -> int:
        self._require_live()
        return int(self._header[HDR_FREE])

    @property
    def initialized_count(self) -> int:
        self._require_live()
        return int(self._header[HDR_INIT])

    @property
    def next_free(self) -> Optional[int]:
        """Address of the free-chain head, or None when the pool is full."""
        self._require_live()
        head = int(self._header[HDR_NEXT])
        if head < 0:
            return None
        return self.region_start + head * self.block_size_bytes

    @property
    def region_start(self) -> int:
        self._require_live()
        return self._region.start

    @property
    def region(self) -> Region:
        self._require_live()
        return self._region

    @property
    def bookkeeping_nbytes(self) -> int:
        """Size of the bookkeeping state, independent of block_count."""
        self._require_live()
        return self._header.nbytes

    def addr_from_index(self, index: int) -> int:
        """Address of block ``index``; ``block_count`` itself is allowed as
        the one-past-end frontier position."""
        self._require_live()
        if not 0 <= index <= self.block_count:
            raise OutOfRangeError(
                f"index {index} outside [0, {self.block_count}]"
            )
        return self.region_start + index * self.block_size_bytes

    def index_from_addr(self, address: int) -> int:
        """Block index of ``address``; must lie on a block boundary."""
        self._require_live()
        offset = address - self.region_start
        if not 0 <= offset < self.block_count * self.block_size_bytes:
            raise OutOfRangeError(f"address {address:#x} outside the region")
        index, rem = divmod(offset, self.block_size_bytes)
        if rem:
            raise AlignmentError(
                f"address {address:#x} is {rem} bytes past a block boundary"
            )
        return index

    # -- allocation ----------------------------------------------------

    def allocate(self) -> Optional[BlockRef]:
        """Hand out one block, or None when the pool is exhausted."""
        self._require_live()
        header = self._header
        init_before = header[HDR_INIT]
        index = int(self._kernels.alloc_one(header, self._region.buf))
        if header[HDR_INIT] != init_before:
            self._region.block_writes += 1
        if index < 0:
            return None
        return BlockRef(index, self.region_start + index * self.block_size_bytes)

    def deallocate(self, address: int) -> None:
        """Return the block at ``address`` to the pool.

        Range and alignment are validated (both O(1)); freeing a block
        that is not currently live is undefined here and detected only
        by the debug layer.
        """
        self._require_live()
        index = self.index_from_addr(address)
        self._kernels.dealloc_one(self._header, self._region.buf, index)
        self._region.block_writes += 1

    def stats(self) -> PoolStats:
        self._require_live()
        return PoolStats(
            block_count=self.block_count,
            free_count=self.free_count,
            initialized_count=self.initialized_count,
            block_size_bytes=self.block_size_bytes,
        )

    # -- diagnostics ---------------------------------------------------

    def _stored_index(self, index: int) -> int:
        """Raw 4-byte value stored at block ``index`` (test hook)."""
        self._require_live()
        off = index * self.block_size_bytes
        return int.from_bytes(bytes(self._region.buf[off:off + INDEX_BYTES]), "little")

    def free_chain(self) -> list:
        """All free block indices in pop order (test hook; walks a loop).

        The first ``initialized_count - (block_count - free_count)``
        entries come from walking the stored chain; the rest is the
        untouched frontier in index order.
        """
        self._require_live()
        linked = self.initialized_count - (self.block_count - self.free_count)
        chain = []
        cursor = int(self._header[HDR_NEXT])
        for _ in range(linked):
            chain.append(cursor)
            cursor = self._stored_index(cursor)
        chain.extend(range(self.initialized_count, self.block_count))
        return chain
