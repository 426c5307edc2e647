"""Hybrid front end: size-class pools with a system-allocator fallback.

Requests are routed to the smallest tier whose block size fits the
request within a waste tolerance; anything else (oversized, outside
tolerance, or the tier is exhausted) goes to the general system
allocator. Releases are routed back by address: each tier owns one
contiguous address range, and fallback addresses are remembered in a
registry because the system allocator exposes no range to test against.

Tier lookups scan the (small, fixed) tier list, never the blocks, so
the per-block no-loops property of the pools is preserved.
"""

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ._kernels import libc_free, libc_malloc
from .core import Pool, PoolConfig, PoolStats
from .errors import PoolConfigError, RoutingError


@dataclass(frozen=True)
class MultiPoolConfig:
    """Tier geometries plus the waste tolerance.

    A request of ``s`` bytes may use a tier only if the tier's block
    size is at most ``s * waste_factor``, bounding the bytes wasted per
    pooled allocation to ``s * (waste_factor - 1)``.
    """

    tiers: Tuple[PoolConfig, ...]
    waste_factor: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        sizes = [tier.block_size_bytes for tier in self.tiers]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise PoolConfigError(
                f"tier block sizes must be strictly increasing, got {sizes}"
            )
        if not (self.waste_factor >= 1.0) or math.isnan(self.waste_factor):
            raise PoolConfigError(
                f"waste_factor must be >= 1, got {self.waste_factor}"
            )


@dataclass(frozen=True)
class MultiPoolStats:
    """Per-tier snapshots plus the fallback counter."""

    tiers: Tuple[PoolStats, ...]
    fallback_count: int


class MultiPool:
    """Router over the tier pools and the fallback registry."""

    __slots__ = ("_config", "_tiers", "_sizes", "_ranges", "_fallback", "_fallback_count")

    def __init__(self, config, tiers, ranges):
        self._config = config
        self._tiers = tiers
        self._sizes = [tier.block_size_bytes for tier in tiers]
        self._ranges = ranges
        self._fallback = set()
        self._fallback_count = 0

    @classmethod
    def create_multi(
        cls, config: MultiPoolConfig, *, backend: Optional[str] = None
    ) -> "MultiPool":
        """Create all tier pools; each creation is O(1) over blocks."""
        tiers: List[Pool] = []
        try:
            for tier_config in config.tiers:
                tiers.append(Pool.create(tier_config, backend=backend))
        except BaseException:
            for pool in tiers:
                pool.destroy()
            raise
        ranges = [
            (pool.region_start, pool.region_start + pool.block_count * pool.block_size_bytes)
            for pool in tiers
        ]
        return cls(config, tiers, ranges)

    def destroy(self) -> None:
        """Release every tier and any fallback memory still registered."""
        for address in self._fallback:
            libc_free(address)
        self._fallback.clear()
        for pool in self._tiers:
            pool.destroy()

    def __enter__(self) -> "MultiPool":
        return self

    def __exit__(self, *exc) -> None:
        self.destroy()

    @property
    def config(self) -> MultiPoolConfig:
        return self._config

    @property
    def fallback_count(self) -> int:
        return self._fallback_count

    def tier_of(self, address: int) -> Optional[int]:
        """Index of the tier owning ``address``, or None."""
        for i, (start, end) in enumerate(self._ranges):
            if start <= address < end:
                return i
        return None

    def alloc(self, size: int) -> int:
        """Serve ``size`` bytes from the best-fit tier or the fallback.

        The candidate tier is the smallest one whose block size covers
        the request within the waste tolerance; if it is exhausted the
        request falls back rather than spilling into a larger tier.
        """
        if size < 1:
            raise ValueError(f"size must be >= 1, got {size}")
        i = bisect_left(self._sizes, size)
        if i < len(self._sizes) and self._sizes[i] <= size * self._config.waste_factor:
            tier = self._tiers[i]
            ref = tier.allocate()
            if ref is not None:
                return ref.address
        address = libc_malloc(size)
        if address == 0:
            raise MemoryError(f"system allocator failed for {size} bytes")
        self._fallback.add(address)
        self._fallback_count += 1
        return address

    def free(self, address: int) -> None:
        """Route a release to the tier owning ``address`` or the registry."""
        tier_index = self.tier_of(address)
        if tier_index is not None:
            self._tiers[tier_index].deallocate(address)
            return
        if address in self._fallback:
            self._fallback.remove(address)
            libc_free(address)
            return
        raise RoutingError(f"address {address:#x} is owned by no tier or fallback")

    def multi_stats(self) -> MultiPoolStats:
        return MultiPoolStats(
            tiers=tuple(pool.stats() for pool in self._tiers),
            fallback_count=self._fallback_count,
        )
