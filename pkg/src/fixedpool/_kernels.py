"""Allocator hot-path kernels.

Every function here is plain Python that is also valid numba nopython
code. ``fixedpool._backend`` exposes two lanes built from this single
source: a compiled lane (``numba.njit``) and an interpreted fallback.
Keep the functions flat (no calls between kernels) so the same bodies
work in both lanes, and keep loop state in locals: repeated stores to
the header array defeat register allocation in the compiled lane.

A pool is a pair of arrays:

* ``header`` -- int64 bookkeeping, slots indexed by the ``HDR_*``
  constants below. Its size is fixed regardless of block count.
* ``region`` -- the uint8 byte region, one contiguous run of
  ``block_count`` equally sized blocks.

Each free block stores the index of the next free block as a 4-byte
little-endian value at its own first bytes, so the free list costs no
memory beyond the header. ``HDR_NEXT`` holds the head of that chain as
a block index, -1 when no block is free. A block freed while the pool
was fully allocated stores the block count as a terminator; it is only
decoded after the frontier has advanced past it, so it always resolves
to an initialized block.
"""

import ctypes

import numpy as np

HDR_BLOCK_SIZE = 0
HDR_BLOCK_COUNT = 1
HDR_FREE = 2
HDR_INIT = 3
HDR_NEXT = 4
HDR_SLOTS = 5

_libc = ctypes.CDLL(None)

# Raw addresses travel as int64: every useful address fits, and numba
# compiles calls to these handles into direct C calls.
libc_malloc = _libc.malloc
libc_malloc.argtypes = [ctypes.c_size_t]
libc_malloc.restype = ctypes.c_int64

libc_free = _libc.free
libc_free.argtypes = [ctypes.c_int64]
libc_free.restype = None


def alloc_one(header, region):
    """Allocate one block; return its index, or -1 when exhausted."""
    if header[HDR_INIT] < header[HDR_BLOCK_COUNT]:
        off = header[HDR_INIT] * header[HDR_BLOCK_SIZE]
        link = header[HDR_INIT] + 1
        region[off] = link & 0xFF
        region[off + 1] = (link >> 8) & 0xFF
        region[off + 2] = (link >> 16) & 0xFF
        region[off + 3] = (link >> 24) & 0xFF
        header[HDR_INIT] += 1
    if header[HDR_FREE] <= 0:
        return np.int64(-1)
    got = header[HDR_NEXT]
    header[HDR_FREE] -= 1
    if header[HDR_FREE] != 0:
        off = got * header[HDR_BLOCK_SIZE]
        header[HDR_NEXT] = (np.int64(region[off])
                            | (np.int64(region[off + 1]) << 8)
                            | (np.int64(region[off + 2]) << 16)
                            | (np.int64(region[off + 3]) << 24))
    else:
        header[HDR_NEXT] = -1
    return got


def dealloc_one(header, region, index):
    """Free the block at ``index``, pushing it onto the free chain."""
    off = index * header[HDR_BLOCK_SIZE]
    if header[HDR_NEXT] != -1:
        link = header[HDR_NEXT]
    else:
        link = header[HDR_BLOCK_COUNT]
    region[off] = link & 0xFF
    region[off + 1] = (link >> 8) & 0xFF
    region[off + 2] = (link >> 16) & 0xFF
    region[off + 3] = (link >> 24) & 0xFF
    header[HDR_NEXT] = index
    header[HDR_FREE] += 1


def fill_pool(header, region, n, out):
    """Allocate up to ``n`` blocks into ``out``; return how many succeeded."""
    bs = header[HDR_BLOCK_SIZE]
    count = header[HDR_BLOCK_COUNT]
    free = header[HDR_FREE]
    init = header[HDR_INIT]
    nxt = header[HDR_NEXT]
    got_n = 0
    for i in range(n):
        if init < count:
            off = init * bs
            link = init + 1
            region[off] = link & 0xFF
            region[off + 1] = (link >> 8) & 0xFF
            region[off + 2] = (link >> 16) & 0xFF
            region[off + 3] = (link >> 24) & 0xFF
            init += 1
        if free <= 0:
            break
        got = nxt
        free -= 1
        if free != 0:
            off = got * bs
            nxt = (np.int64(region[off])
                   | (np.int64(region[off + 1]) << 8)
                   | (np.int64(region[off + 2]) << 16)
                   | (np.int64(region[off + 3]) << 24))
        else:
            nxt = -1
        out[i] = got
        got_n += 1
    header[HDR_FREE] = free
    header[HDR_INIT] = init
    header[HDR_NEXT] = nxt
    return got_n


def release_pool(header, region, handles, n):
    """Free ``handles[:n]`` in order."""
    bs = header[HDR_BLOCK_SIZE]
    count = header[HDR_BLOCK_COUNT]
    free = header[HDR_FREE]
    nxt = header[HDR_NEXT]
    for i in range(n):
        index = handles[i]
        off = index * bs
        if nxt != -1:
            link = nxt
        else:
            link = count
        region[off] = link & 0xFF
        region[off + 1] = (link >> 8) & 0xFF
        region[off + 2] = (link >> 16) & 0xFF
        region[off + 3] = (link >> 24) & 0xFF
        nxt = index
        free += 1
    header[HDR_FREE] = free
    header[HDR_NEXT] = nxt


def bulk_pool(header, region, n, out):
    """Allocate ``n`` blocks, then free them all in allocation order."""
    bs = header[HDR_BLOCK_SIZE]
    count = header[HDR_BLOCK_COUNT]
    free = header[HDR_FREE]
    init = header[HDR_INIT]
    nxt = header[HDR_NEXT]
    got_n = 0
    for i in range(n):
        if init < count:
            off = init * bs
            link = init + 1
            region[off] = link & 0xFF
            region[off + 1] = (link >> 8) & 0xFF
            region[off + 2] = (link >> 16) & 0xFF
            region[off + 3] = (link >> 24) & 0xFF
            init += 1
        if free <= 0:
            break
        got = nxt
        free -= 1
        if free != 0:
            off = got * bs
            nxt = (np.int64(region[off])
                   | (np.int64(region[off + 1]) << 8)
                   | (np.int64(region[off + 2]) << 16)
                   | (np.int64(region[off + 3]) << 24))
        else:
            nxt = -1
        out[i] = got
        got_n += 1
    for i in range(got_n):
        index = out[i]
        off = index * bs
        if nxt != -1:
            link = nxt
        else:
            link = count
        region[off] = link & 0xFF
        region[off + 1] = (link >> 8) & 0xFF
        region[off + 2] = (link >> 16) & 0xFF
        region[off + 3] = (link >> 24) & 0xFF
        nxt = index
        free += 1
    header[HDR_FREE] = free
    header[HDR_INIT] = init
    header[HDR_NEXT] = nxt
    return got_n


def pairs_pool(header, region, n):
    """Allocate and immediately free, ``n`` times."""
    bs = header[HDR_BLOCK_SIZE]
    count = header[HDR_BLOCK_COUNT]
    free = header[HDR_FREE]
    init = header[HDR_INIT]
    nxt = header[HDR_NEXT]
    for _ in range(n):
        if init < count:
            off = init * bs
            link = init + 1
            region[off] = link & 0xFF
            region[off + 1] = (link >> 8) & 0xFF
            region[off + 2] = (link >> 16) & 0xFF
            region[off + 3] = (link >> 24) & 0xFF
            init += 1
        if free <= 0:
            continue
        got = nxt
        free -= 1
        if free != 0:
            off = got * bs
            nxt = (np.int64(region[off])
                   | (np.int64(region[off + 1]) << 8)
                   | (np.int64(region[off + 2]) << 16)
                   | (np.int64(region[off + 3]) << 24))
        else:
            nxt = -1
        off = got * bs
        if nxt != -1:
            link = nxt
        else:
            link = count
        region[off] = link & 0xFF
        region[off + 1] = (link >> 8) & 0xFF
        region[off + 2] = (link >> 16) & 0xFF
        region[off + 3] = (link >> 24) & 0xFF
        nxt = got
        free += 1
    header[HDR_FREE] = free
    header[HDR_INIT] = init
    header[HDR_NEXT] = nxt


def churn_pool(header, region, coins, victims, live, state):
    """Random alloc/free mix against the pool.

    ``coins[i] == 1`` requests an allocation and 0 a free, overridden
    when the live set is empty or full. Victims are picked by
    ``victims[i] % live_count`` with swap-removal, so the walk is a pure
    function of the materialized arrays. ``state[0]`` carries the live
    count in and out; ``live[:state[0]]`` holds the live block indices.
    """
    bs = header[HDR_BLOCK_SIZE]
    count = header[HDR_BLOCK_COUNT]
    free = header[HDR_FREE]
    init = header[HDR_INIT]
    nxt = header[HDR_NEXT]
    cap = len(live)
    lc = state[0]
    for i in range(len(coins)):
        do_alloc = coins[i] == 1
        if lc == 0:
            do_alloc = True
        elif lc == cap:
            do_alloc = False
        if do_alloc:
            if free <= 0:
                # live[] did not cover every outstanding block; refuse
                # rather than decode an empty head.
                header[HDR_FREE] = free
                header[HDR_INIT] = init
                header[HDR_NEXT] = nxt
                state[0] = lc
                return -1
            if init < count:
                off = init * bs
                link = init + 1
                region[off] = link & 0xFF
                region[off + 1] = (link >> 8) & 0xFF
                region[off + 2] = (link >> 16) & 0xFF
                region[off + 3] = (link >> 24) & 0xFF
                init += 1
            got = nxt
            free -= 1
            if free != 0:
                off = got * bs
                nxt = (np.int64(region[off])
                       | (np.int64(region[off + 1]) << 8)
                       | (np.int64(region[off + 2]) << 16)
                       | (np.int64(region[off + 3]) << 24))
            else:
                nxt = -1
            live[lc] = got
            lc += 1
        else:
            slot = victims[i] % lc
            index = live[slot]
            live[slot] = live[lc - 1]
            lc -= 1
            off = index * bs
            if nxt != -1:
                link = nxt
            else:
                link = count
            region[off] = link & 0xFF
            region[off + 1] = (link >> 8) & 0xFF
            region[off + 2] = (link >> 16) & 0xFF
            region[off + 3] = (link >> 24) & 0xFF
            nxt = index
            free += 1
    header[HDR_FREE] = free
    header[HDR_INIT] = init
    header[HDR_NEXT] = nxt
    state[0] = lc
    return 0


def fill_system(size, n, ptrs):
    """malloc ``n`` chunks into ``ptrs``; on failure release and return -1."""
    for i in range(n):
        p = libc_malloc(size)
        if p == 0:
            for j in range(i):
                libc_free(ptrs[j])
            return -1
        ptrs[i] = p
    return 0


def release_system(ptrs, n):
    """free ``ptrs[:n]`` in order."""
    for i in range(n):
        libc_free(ptrs[i])


def bulk_system(size, n, ptrs):
    """malloc ``n`` chunks, then free them all in allocation order."""
    for i in range(n):
        p = libc_malloc(size)
        if p == 0:
            for j in range(i):
                libc_free(ptrs[j])
            return -1
        ptrs[i] = p
    for i in range(n):
        libc_free(ptrs[i])
    return 0


def pairs_system(size, n):
    """malloc and immediately free, ``n`` times."""
    for _ in range(n):
        p = libc_malloc(size)
        if p == 0:
            return -1
        libc_free(p)
    return 0


def churn_system(size, coins, victims, live, state):
    """Random malloc/free mix; same walk as ``churn_pool``."""
    cap = len(live)
    lc = state[0]
    for i in range(len(coins)):
        do_alloc = coins[i] == 1
        if lc == 0:
            do_alloc = True
        elif lc == cap:
            do_alloc = False
        if do_alloc:
            p = libc_malloc(size)
            if p == 0:
                state[0] = lc
                return -1
            live[lc] = p
            lc += 1
        else:
            slot = victims[i] % lc
            p = live[slot]
            live[slot] = live[lc - 1]
            lc -= 1
            libc_free(p)
    state[0] = lc
    return 0
