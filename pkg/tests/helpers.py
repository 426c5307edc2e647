"""Reference models the tests check the allocator against."""


class FreeStackOracle:
    """Explicit free-index simulator with the pool's ordering policy.

    The free set behaves as a stack: the most recently freed index is
    handed out first, and never-touched frontier blocks are consumed in
    index order beneath everything else. Growth appends fresh indices
    under the existing stack; shrink drops the truncated indices.
    """

    def __init__(self, block_count: int):
        # pop() must yield 0, 1, 2, ... on a fresh pool
        self.free = list(range(block_count - 1, -1, -1))
        self.live = set()
        self.block_count = block_count

    def allocate(self):
        if not self.free:
            return None
        index = self.free.pop()
        self.live.add(index)
        return index

    def deallocate(self, index: int) -> None:
        assert index in self.live, f"oracle misuse: {index} not live"
        self.live.remove(index)
        self.free.append(index)

    def grow(self, new_block_count: int) -> None:
        assert new_block_count > self.block_count
        fresh = list(range(new_block_count - 1, self.block_count - 1, -1))
        self.free = fresh + self.free
        self.block_count = new_block_count

    def shrink(self, new_block_count: int) -> None:
        assert 1 <= new_block_count <= self.block_count
        cut = {i for i in self.free if i >= new_block_count}
        assert not any(i >= new_block_count for i in self.live)
        self.free = [i for i in self.free if i not in cut]
        self.block_count = new_block_count

    @property
    def free_count(self) -> int:
        return len(self.free)

    def pop_order(self):
        """Indices in the order allocate would hand them out."""
        return list(reversed(self.free))
