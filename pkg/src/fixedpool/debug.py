"""Verification layer over the core pool.

Wraps each payload in guard-byte signatures, tracks per-block occupancy
to catch double frees, and tags every allocation so leaks can be
reported by call site. All of it costs extra memory and time; that is
the trade this layer makes for diagnostics. Each block of the inner
pool is laid out as ``[front guard | payload | rear guard]``.

Free blocks are not guard-checked: they legitimately carry free-list
link data in their first bytes.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .core import INDEX_BYTES, Pool, PoolConfig
from .errors import (
    AlignmentError,
    DoubleFreeError,
    GuardCorruptionError,
    OutOfRangeError,
    PoolConfigError,
)

DEFAULT_GUARD_SIZE = 4
DEFAULT_GUARD_PATTERN = 0xFD  # odd, non-zero: distinct from zero fill and from small indices

FRONT = "front"
REAR = "rear"


@dataclass(frozen=True)
class GuardConfig:
    """Guard geometry and which checks are active."""

    guard_size_bytes: int = DEFAULT_GUARD_SIZE
    guard_pattern: int = DEFAULT_GUARD_PATTERN
    check_range: bool = True
    check_alignment: bool = True
    check_double_free: bool = True
    check_guards: bool = True
    check_leaks: bool = True

    def __post_init__(self):
        if self.check_guards and self.guard_size_bytes < 1:
            raise PoolConfigError("guard_size_bytes must be >= 1 when guards are enabled")
        if not 0 <= self.guard_pattern <= 0xFF:
            raise PoolConfigError(f"guard_pattern must be one byte, got {self.guard_pattern}")


@dataclass(frozen=True)
class AllocationRecord:
    """Per-block debug record."""

    block_index: int
    tag: Optional[str]
    live: bool


@dataclass(frozen=True)
class GuardViolation:
    """One corrupted guard area on a live block."""

    block_index: int
    tag: Optional[str]
    side: str  # FRONT or REAR

    def render(self) -> str:
        return f"corruption block={self.block_index} tag={self.tag} side={self.side}"


class DebugPool:
    """Checked pool front end. Build instances with :meth:`create_debug`."""

    __slots__ = ("_pool", "_config", "_payload_size", "_guard", "_occupied", "_tags")

    def __init__(self, pool, config, payload_size, guard, occupied, tags):
        self._pool = pool
        self._config = config
        self._payload_size = payload_size
        self._guard = guard
        self._occupied = occupied
        self._tags = tags

    @classmethod
    def create_debug(
        cls,
        payload_size: int,
        block_count: int,
        config: GuardConfig = GuardConfig(),
        *,
        backend: Optional[str] = None,
    ) -> "DebugPool":
        """Create the inner pool with blocks inflated by the guard areas.

        Guards are written per block lazily when the block is first
        allocated, so creation stays loop-free over blocks. With
        ``check_guards`` disabled no guard space is reserved and the
        payload layout is byte-identical to a core pool.
        """
        if payload_size < INDEX_BYTES:
            raise PoolConfigError(
                f"payload_size must be >= {INDEX_BYTES}, got {payload_size}"
            )
        guard = config.guard_size_bytes if config.check_guards else 0
        inner = Pool.create(
            PoolConfig(payload_size + 2 * guard, block_count), backend=backend
        )
        occupied = np.zeros(block_count, dtype=bool)
        tags: List[Optional[str]] = [None] * block_count
        return cls(inner, config, payload_size, guard, occupied, tags)

    def destroy(self) -> None:
        self._pool.destroy()

    def __enter__(self) -> "DebugPool":
        return self

    def __exit__(self, *exc) -> None:
        self.destroy()

    @property
    def pool(self) -> Pool:
        """The wrapped core pool."""
        return self._pool

    @property
    def config(self) -> GuardConfig:
        return self._config

    @property
    def payload_size(self) -> int:
        return self._payload_size

    @property
    def block_count(self) -> int:
        return self._pool.block_count

    @property
    def live_count(self) -> int:
        return int(np.count_nonzero(self._occupied))

    # -- operations ----------------------------------------------------

    def allocate_tagged(self, tag: Optional[str] = None) -> Optional[int]:
        """Allocate one payload, stamping guards and recording ``tag``.

        Returns the payload address, or None when the pool is exhausted.
        """
        ref = self._pool.allocate()
        if ref is None:
            return None
        index = ref.index
        if self._guard:
            buf = self._pool.region.buf
            inner_bs = self._pool.block_size_bytes
            off = index * inner_bs
            buf[off:off + self._guard] = self._config.guard_pattern
            buf[off + self._guard + self._payload_size:off + inner_bs] = (
                self._config.guard_pattern
            )
        self._occupied[index] = True
        self._tags[index] = tag if self._config.check_leaks else None
        return ref.address + self._guard

    def deallocate_checked(self, payload_address: int) -> None:
        """Validate and free the payload at ``payload_address``.

        Checks run in order: region range, block alignment, occupancy
        (double free), local guard integrity. Disabled checks are
        skipped; the core pool still enforces range and alignment.
        """
        cfg = self._config
        pool = self._pool
        inner_bs = pool.block_size_bytes
        block_address = payload_address - self._guard
        offset = block_address - pool.region_start
        in_range = 0 <= offset < pool.block_count * inner_bs
        if cfg.check_range and not in_range:
            raise OutOfRangeError(
                f"payload address {payload_address:#x} outside the pool region"
            )
        aligned = in_range and offset % inner_bs == 0
        if cfg.check_alignment and in_range and not aligned:
            raise AlignmentError(
                f"payload address {payload_address:#x} not on a block boundary"
            )
        if aligned:
            index = offset // inner_bs
            if cfg.check_double_free and not self._occupied[index]:
                raise DoubleFreeError(f"block {index} is not live")
            if cfg.check_guards and self._occupied[index]:
                violation = self._block_violation(index)
                if violation is not None:
                    raise GuardCorruptionError(
                        violation.block_index, violation.tag, violation.side
                    )
            self._occupied[index] = False
        pool.deallocate(block_address)

    def check_all_guards(self) -> List[GuardViolation]:
        """Scan every live block's guards; empty list means clean."""
        if not self._config.check_guards:
            return []
        findings = []
        for index in np.flatnonzero(self._occupied):
            index = int(index)
            for side in self._corrupted_sides(index):
                findings.append(GuardViolation(index, self._tags[index], side))
        return findings

    def _corrupted_sides(self, index: int) -> List[str]:
        buf = self._pool.region.buf
        inner_bs = self._pool.block_size_bytes
        off = index * inner_bs
        pattern = self._config.guard_pattern
        sides = []
        if (buf[off:off + self._guard] != pattern).any():
            sides.append(FRONT)
        rear_off = off + self._guard + self._payload_size
        if (buf[rear_off:off + inner_bs] != pattern).any():
            sides.append(REAR)
        return sides

    def _block_violation(self, index: int) -> Optional[GuardViolation]:
        sides = self._corrupted_sides(index)
        if sides:
            return GuardViolation(index, self._tags[index], sides[0])
        return None

    def leak_report(self) -> List[Tuple[int, Optional[str]]]:
        """(block_index, tag) for every allocation still live."""
        if not self._config.check_leaks:
            return []
        return [
            (int(index), self._tags[index]) for index in np.flatnonzero(self._occupied)
        ]

    def render_leaks(self) -> List[str]:
        """Leak report as text lines."""
        return [f"leak block={index} tag={tag}" for index, tag in self.leak_report()]

    def allocation_records(self) -> List[AllocationRecord]:
        """Records for every block that currently carries debug state."""
        out = []
        for index in range(self.block_count):
            live = bool(self._occupied[index])
            tag = self._tags[index]
            if live or tag is not None:
                out.append(AllocationRecord(index, tag, live))
        return out
