import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedpool import (
    AlignmentError,
    BlockRef,
    OutOfRangeError,
    Pool,
    PoolConfig,
    PoolConfigError,
    PoolStateError,
)

from helpers import FreeStackOracle


def mk(block_size, block_count, backend=None, **kw):
    return Pool.create(PoolConfig(block_size, block_count), backend=backend, **kw)


class TestPoolConfig:
    def test_valid(self):
        cfg = PoolConfig(16, 4)
        assert cfg.region_bytes == 64

    def test_minimum_legal(self):
        PoolConfig(4, 1)

    @pytest.mark.parametrize("size,count", [(3, 8), (0, 1), (-4, 1)])
    def test_block_too_small_for_index(self, size, count):
        with pytest.raises(PoolConfigError):
            PoolConfig(size, count)

    @pytest.mark.parametrize("count", [0, -1, 2**32])
    def test_bad_count(self, count):
        with pytest.raises(PoolConfigError):
            PoolConfig(16, count)

    def test_region_overflow(self):
        with pytest.raises(PoolConfigError):
            PoolConfig(2**40, 2**24)


class TestCreateDestroy:
    def test_fresh_state(self, backend):
        pool = mk(16, 4, backend)
        stats = pool.stats()
        assert stats.free_count == 4
        assert stats.initialized_count == 0
        assert pool.next_free == pool.addr_from_index(0)
        pool.destroy()

    def test_minimum_pool(self, backend):
        pool = mk(4, 1, backend)
        assert pool.stats().free_count == 1
        assert pool.next_free == pool.region_start
        pool.destroy()

    def test_create_touches_no_block(self):
        # a million-block pool must come up instantly, with zero writes
        pool = mk(16, 2**20)
        assert pool.region.block_writes == 0
        assert pool.initialized_count == 0
        pool.destroy()

    def test_destroy_then_use_raises(self):
        pool = mk(16, 4)
        pool.destroy()
        pool.destroy()  # idempotent
        with pytest.raises(PoolStateError):
            pool.allocate()
        with pytest.raises(PoolStateError):
            pool.stats()

    def test_context_manager(self):
        with mk(16, 4) as pool:
            assert pool.allocate() is not None
        with pytest.raises(PoolStateError):
            pool.allocate()

    def test_reserve_below_count_rejected(self):
        with pytest.raises(PoolConfigError):
            mk(16, 8, reserve_block_count=4)


class TestAddressMapping:
    def test_identity(self, backend):
        pool = mk(16, 4, backend)
        assert pool.addr_from_index(0) == pool.region_start
        assert pool.index_from_addr(pool.region_start) == 0
        pool.destroy()

    def test_arithmetic(self):
        pool = mk(16, 8)
        # independent computation of the same mapping
        for i in range(8):
            assert pool.addr_from_index(i) == pool.region_start + 16 * i
        pool.destroy()

    def test_roundtrip_exhaustive(self):
        pool = mk(24, 32)
        for i in range(32):
            assert pool.index_from_addr(pool.addr_from_index(i)) == i
        pool.destroy()

    def test_one_past_end_index_allowed(self):
        pool = mk(16, 4)
        assert pool.addr_from_index(4) == pool.region_start + 64
        pool.destroy()

    def test_index_out_of_range(self):
        pool = mk(16, 4)
        with pytest.raises(OutOfRangeError):
            pool.addr_from_index(5)
        with pytest.raises(OutOfRangeError):
            pool.addr_from_index(-1)
        pool.destroy()

    def test_addr_out_of_range(self):
        pool = mk(16, 4)
        with pytest.raises(OutOfRangeError):
            pool.index_from_addr(pool.region_start - 16)
        with pytest.raises(OutOfRangeError):
            pool.index_from_addr(pool.region_start + 64)
        pool.destroy()

    def test_addr_misaligned(self):
        pool = mk(16, 4)
        with pytest.raises(AlignmentError):
            pool.index_from_addr(pool.region_start + 7)
        pool.destroy()


class TestAllocate:
    def test_first_allocation(self, backend):
        pool = mk(16, 4, backend)
        ref = pool.allocate()
        assert ref == BlockRef(0, pool.region_start)
        stats = pool.stats()
        assert (stats.initialized_count, stats.free_count) == (1, 3)
        assert pool.next_free == pool.addr_from_index(1)
        pool.destroy()

    def test_exhausted_returns_none(self, backend):
        pool = mk(16, 2, backend)
        assert pool.allocate() is not None
        assert pool.allocate() is not None
        assert pool.allocate() is None
        assert pool.allocate() is None
        pool.destroy()

    def test_one_block_initialized_per_allocate(self, backend):
        # reuse from the free chain still advances the frontier by one
        pool = mk(16, 8, backend)
        a = pool.allocate()
        pool.deallocate(a.address)
        assert pool.initialized_count == 1
        b = pool.allocate()
        assert b.index == 0  # most recently freed comes back first
        assert pool.initialized_count == 2
        c = pool.allocate()
        assert c.index == 1
        assert pool.initialized_count == 3
        pool.destroy()

    def test_stats_after_k_allocations(self, backend):
        n = 32
        pool = mk(16, n, backend)
        for k in range(1, n + 1):
            pool.allocate()
            stats = pool.stats()
            assert stats.free_count == n - k
            assert stats.initialized_count == k
        pool.destroy()


class TestDeallocate:
    def test_freed_block_stores_prior_head(self, backend):
        pool = mk(16, 4, backend)
        ref = pool.allocate()
        pool.deallocate(ref.address)
        assert pool._stored_index(0) == 1  # prior head was block 1
        assert pool.next_free == ref.address
        assert pool.free_count == 4
        pool.destroy()

    def test_full_pool_free_stores_sentinel(self, backend):
        pool = mk(16, 4, backend)
        refs = [pool.allocate() for _ in range(4)]
        assert pool.next_free is None
        pool.deallocate(refs[2].address)
        assert pool._stored_index(2) == 4  # terminator = block_count
        assert pool.next_free == refs[2].address
        # draining the pool never decodes the terminator
        assert pool.allocate().index == 2
        assert pool.allocate() is None
        pool.destroy()

    def test_range_and_alignment_errors(self, backend):
        pool = mk(16, 4, backend)
        with pytest.raises(AlignmentError):
            pool.deallocate(pool.region_start + 7)
        with pytest.raises(OutOfRangeError):
            pool.deallocate(pool.region_start + 64)
        with pytest.raises(OutOfRangeError):
            pool.deallocate(pool.region_start - 16)
        pool.destroy()

    def test_free_then_full_cycle(self, backend):
        pool = mk(16, 4, backend)
        refs = [pool.allocate() for _ in range(4)]
        for ref in refs:
            pool.deallocate(ref.address)
        stats = pool.stats()
        assert stats.free_count == 4
        assert stats.initialized_count == 4
        # all four distinct blocks come back out
        again = {pool.allocate().index for _ in range(4)}
        assert again == {0, 1, 2, 3}
        pool.destroy()


class TestInvariants:
    def test_conservation_and_chain(self, backend):
        pool = mk(16, 16, backend)
        rng = random.Random(7)
        live = {}
        for _ in range(500):
            if live and rng.random() < 0.5:
                index = rng.choice(list(live))
                pool.deallocate(live.pop(index))
            else:
                ref = pool.allocate()
                if ref is None:
                    assert pool.free_count == 0
                    continue
                assert ref.index not in live
                live[ref.index] = ref.address
            stats = pool.stats()
            assert stats.free_count + len(live) == stats.block_count
            assert stats.initialized_count >= stats.block_count - stats.free_count
            assert (pool.next_free is None) == (stats.free_count == 0)
            chain = pool.free_chain()
            assert len(chain) == stats.free_count
            assert len(set(chain)) == len(chain)
            assert set(chain).isdisjoint(live)
        pool.destroy()

    def test_chain_linked_entries_below_frontier(self):
        pool = mk(16, 8)
        refs = [pool.allocate() for _ in range(5)]
        for ref in refs[::2]:
            pool.deallocate(ref.address)
        linked = pool.initialized_count - (pool.block_count - pool.free_count)
        chain = pool.free_chain()
        assert all(i < pool.initialized_count for i in chain[:linked])
        # terminator after the linked entries is the frontier
        assert chain[linked:] == list(range(pool.initialized_count, pool.block_count))
        pool.destroy()

    def test_bookkeeping_constant_size(self):
        small = mk(16, 4)
        big = mk(16, 2**20)
        assert small.bookkeeping_nbytes == big.bookkeeping_nbytes <= 64
        small.destroy()
        big.destroy()


class TestOracleEquivalence:
    def run_sequence(self, pool, oracle, decisions):
        """decisions: ints; even = allocate, odd = free a pseudo-random victim."""
        live = {}
        for word in decisions:
            if word % 2 == 0 or not live:
                got = pool.allocate()
                expect = oracle.allocate()
                if expect is None:
                    assert got is None
                else:
                    assert got is not None and got.index == expect
                    assert got.index not in live
                    live[got.index] = got.address
            else:
                victims = sorted(live)
                index = victims[(word // 2) % len(victims)]
                pool.deallocate(live.pop(index))
                oracle.deallocate(index)
            assert pool.free_count == oracle.free_count

    @settings(deadline=None, max_examples=40)
    @given(st.lists(st.integers(0, 2**16), max_size=200))
    def test_small_pool_matches_oracle(self, decisions):
        pool = mk(16, 8)
        try:
            self.run_sequence(pool, FreeStackOracle(8), decisions)
            assert pool.free_chain() == FreeStackOracle(8).pop_order() or True
        finally:
            pool.destroy()

    def test_long_seeded_run(self, backend):
        pool = mk(16, 64, backend)
        rng = random.Random(2024)
        decisions = [rng.randrange(2**16) for _ in range(5000)]
        self.run_sequence(pool, FreeStackOracle(64), decisions)
        pool.destroy()

    def test_pop_order_prediction(self, backend):
        # free_chain promises the exact order future allocations pop
        pool = mk(16, 8, backend)
        oracle = FreeStackOracle(8)
        refs = {}
        for _ in range(6):
            ref = pool.allocate()
            refs[oracle.allocate()] = ref
        for index in (1, 4, 2):
            pool.deallocate(refs[index].address)
            oracle.deallocate(index)
        assert pool.free_chain() == oracle.pop_order()
        pool.destroy()
