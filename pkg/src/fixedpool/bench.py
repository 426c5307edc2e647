"""Benchmark harness: pool vs. general system allocator.

Times allocate/deallocate workloads over a grid of block sizes and
operation counts and emits machine-readable CSV rows. One row's
``op_count`` counts allocate+free pairs; ``ns_per_op`` is always
``total_ns / op_count``. Three patterns:

* ``bulk``  -- allocate all, then free all (in allocation order).
* ``pairs`` -- allocate+free repeatedly.
* ``churn`` -- seeded random mix at roughly constant occupancy,
  2 * op_count steps, ramped to half occupancy before timing.

Workloads are materialized before the timed section, the clock is
monotonic, and for pool cells the pool create+destroy cost is timed
separately and reported as a pseudo-pattern ``create`` row (one per
repetition). Cells hit by system-allocator exhaustion are marked failed
and skipped; the remaining cells still run.
"""

import statistics
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ._backend import get_backend
from .core import Pool, PoolConfig
from .errors import ComparisonError

PATTERNS = ("bulk", "pairs", "churn")
ALLOCATORS = ("pool", "system")
CREATE_PATTERN = "create"

CSV_HEADER = "allocator,block_size,pattern,op_count,total_ns,ns_per_op,repetition"


@dataclass(frozen=True)
class BenchPlan:
    """One allocator's grid of timed cells."""

    allocator: str
    block_sizes: Tuple[int, ...]
    op_counts: Tuple[int, ...]
    pattern: str = "bulk"
    repetitions: int = 3
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(self.block_sizes))
        object.__setattr__(self, "op_counts", tuple(self.op_counts))
        if self.allocator not in ALLOCATORS:
            raise ValueError(f"allocator must be one of {ALLOCATORS}, got {self.allocator!r}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"pattern must be one of {PATTERNS}, got {self.pattern!r}")
        if not self.block_sizes or any(s < 4 for s in self.block_sizes):
            raise ValueError(f"block sizes must all be >= 4, got {self.block_sizes}")
        if not self.op_counts or any(n < 1 for n in self.op_counts):
            raise ValueError(f"op counts must all be >= 1, got {self.op_counts}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.pattern == "churn" and self.seed is None:
            raise ValueError("churn requires a seed")


@dataclass(frozen=True)
class BenchRow:
    allocator: str
    block_size: int
    pattern: str
    op_count: int
    total_ns: int
    ns_per_op: float
    repetition: int


@dataclass
class BenchReport:
    """Timing rows in plan order, plus any failed cells."""

    rows: List[BenchRow] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class SpeedupRow:
    block_size: int
    pattern: str
    op_count: int
    pool_ns_per_op: float
    system_ns_per_op: float
    speedup: float


def _row(allocator, size, pattern, count, total_ns, rep) -> BenchRow:
    return BenchRow(
        allocator=allocator,
        block_size=size,
        pattern=pattern,
        op_count=count,
        total_ns=int(total_ns),
        ns_per_op=total_ns / count,
        repetition=rep,
    )


def churn_workload(seed: int, block_size: int, op_count: int, repetition: int):
    """Materialize one cell's churn arrays; allocator-independent.

    Returns ``(coins, victims)``: 2 * op_count coin flips (1 = alloc)
    and victim draws. The walk both allocators execute is a pure
    function of these arrays, the ramp occupancy, and the capacity.
    """
    rng = np.random.default_rng([seed, block_size, op_count, repetition])
    steps = 2 * op_count
    coins = rng.integers(0, 2, size=steps, dtype=np.uint8)
    victims = rng.integers(0, np.iinfo(np.int64).max, size=steps, dtype=np.int64)
    return coins, victims


def _time_pool_cell(kernels, size, count, rep, plan):
    """Returns (create_row, pattern_row). Pool cells cannot fail."""
    t0 = time.perf_counter_ns()
    pool = Pool.create(PoolConfig(size, count))
    create_ns = time.perf_counter_ns() - t0
    header, buf = pool._header, pool.region.buf

    if plan.pattern == "bulk":
        out = np.empty(count, dtype=np.int64)
        t0 = time.perf_counter_ns()
        got = kernels.bulk_pool(header, buf, count, out)
        total_ns = time.perf_counter_ns() - t0
        assert got == count
    elif plan.pattern == "pairs":
        t0 = time.perf_counter_ns()
        kernels.pairs_pool(header, buf, count)
        total_ns = time.perf_counter_ns() - t0
    else:  # churn
        coins, victims = churn_workload(plan.seed, size, count, rep)
        live = np.empty(count, dtype=np.int64)
        state = np.zeros(1, dtype=np.int64)
        state[0] = kernels.fill_pool(header, buf, count // 2, live)
        t0 = time.perf_counter_ns()
        status = kernels.churn_pool(header, buf, coins, victims, live, state)
        total_ns = time.perf_counter_ns() - t0
        assert status == 0
        kernels.release_pool(header, buf, live, int(state[0]))

    t0 = time.perf_counter_ns()
    pool.destroy()
    create_ns += time.perf_counter_ns() - t0
    return (
        _row("pool", size, CREATE_PATTERN, count, create_ns, rep),
        _row("pool", size, plan.pattern, count, total_ns, rep),
    )


def _time_system_cell(kernels, size, count, rep, plan):
    """Returns a row or None when the cell failed."""
    if plan.pattern == "bulk":
        ptrs = np.empty(count, dtype=np.int64)
        t0 = time.perf_counter_ns()
        status = kernels.bulk_system(size, count, ptrs)
        total_ns = time.perf_counter_ns() - t0
    elif plan.pattern == "pairs":
        t0 = time.perf_counter_ns()
        status = kernels.pairs_system(size, count)
        total_ns = time.perf_counter_ns() - t0
    else:  # churn
        coins, victims = churn_workload(plan.seed, size, count, rep)
        live = np.empty(count, dtype=np.int64)
        state = np.zeros(1, dtype=np.int64)
        if kernels.fill_system(size, count // 2, live) != 0:
            return None
        state[0] = count // 2
        t0 = time.perf_counter_ns()
        status = kernels.churn_system(size, coins, victims, live, state)
        total_ns = time.perf_counter_ns() - t0
        kernels.release_system(live, int(state[0]))
    if status != 0:
        return None
    return _row("system", size, plan.pattern, count, total_ns, rep)


def _warmup(kernels, plan):
    """Run a tiny throwaway cell so compile time stays out of the clock."""
    tiny = BenchPlan(
        allocator=plan.allocator,
        block_sizes=(16,),
        op_counts=(4,),
        pattern=plan.pattern,
        repetitions=1,
        seed=plan.seed if plan.seed is not None else 0,
    )
    if plan.allocator == "pool":
        _time_pool_cell(kernels, 16, 4, 0, tiny)
    else:
        _time_system_cell(kernels, 16, 4, 0, tiny)


def run_plan(plan: BenchPlan, backend: Optional[str] = None) -> BenchReport:
    """Execute every cell of ``plan``; rows come out in plan order."""
    kernels = get_backend(backend)
    report = BenchReport()
    _warmup(kernels, plan)
    for size in plan.block_sizes:
        for count in plan.op_counts:
            for rep in range(plan.repetitions):
                if plan.allocator == "pool":
                    create_row, pattern_row = _time_pool_cell(kernels, size, count, rep, plan)
                    report.rows.append(create_row)
                    report.rows.append(pattern_row)
                else:
                    row = _time_system_cell(kernels, size, count, rep, plan)
                    if row is None:
                        report.failures.append(
                            f"system size={size} count={count} rep={rep}: allocator exhausted"
                        )
                    else:
                        report.rows.append(row)
    return report


def _median_cells(report: BenchReport, allocator: str) -> dict:
    samples: dict = {}
    for row in report.rows:
        if row.allocator != allocator or row.pattern == CREATE_PATTERN:
            continue
        key = (row.block_size, row.pattern, row.op_count)
        samples.setdefault(key, []).append(row.ns_per_op)
    return {key: statistics.median(values) for key, values in samples.items()}


def compare(pool_report: BenchReport, system_report: BenchReport) -> List[SpeedupRow]:
    """Per-cell speedup of the pool over the system allocator.

    ``speedup = system ns_per_op / pool ns_per_op`` on the median across
    repetitions. ``create`` pseudo-rows are pool-only and ignored. Both
    reports must cover exactly the same cells.
    """
    pool_cells = _median_cells(pool_report, "pool")
    system_cells = _median_cells(system_report, "system")
    if pool_cells.keys() != system_cells.keys():
        only_pool = sorted(pool_cells.keys() - system_cells.keys())
        only_system = sorted(system_cells.keys() - pool_cells.keys())
        raise ComparisonError(
            f"reports cover different cells; pool-only={only_pool} system-only={only_system}"
        )
    out = []
    for key in sorted(pool_cells):
        size, pattern, count = key
        out.append(
            SpeedupRow(
                block_size=size,
                pattern=pattern,
                op_count=count,
                pool_ns_per_op=pool_cells[key],
                system_ns_per_op=system_cells[key],
                speedup=system_cells[key] / pool_cells[key],
            )
        )
    return out


def emit_csv(report: BenchReport, destination) -> None:
    """Write the report; same report, byte-identical file."""
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    lines = [CSV_HEADER]
    for row in report.rows:
        lines.append(
            f"{row.allocator},{row.block_size},{row.pattern},{row.op_count},"
            f"{row.total_ns},{row.ns_per_op:.3f},{row.repetition}"
        )
    with open(destination, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_report(path, allocator: Optional[str] = None) -> BenchReport:
    """Read a CSV written by :func:`emit_csv`, optionally one allocator's rows."""
    report = BenchReport()
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 7:
                raise ValueError(f"malformed row {line!r}")
            row = BenchRow(
                allocator=parts[0],
                block_size=int(parts[1]),
                pattern=parts[2],
                op_count=int(parts[3]),
                total_ns=int(parts[4]),
                ns_per_op=float(parts[5]),
                repetition=int(parts[6]),
            )
            if allocator is None or row.allocator == allocator:
                report.rows.append(row)
    return report
