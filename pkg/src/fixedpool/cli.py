"""``bench`` command line interface.

    bench run --allocator {pool|system|both} --sizes 16,64,256 \
              --counts 1000,100000 --pattern {bulk|pairs|churn} \
              --reps N --seed S --out results.csv
    bench compare --pool a.csv --system b.csv
    bench backends --sizes ... --counts ...

``run`` writes the CSV and exits nonzero if any cell failed. ``compare``
prints the per-cell speedup table from two CSVs (one file may serve
both roles when it holds rows for both allocators). ``backends`` times
the pool kernels on the compiled and interpreted lanes side by side.
"""

import argparse
import sys
from typing import List, Optional

from ._backend import get_backend, jit_available
from .bench import (
    ALLOCATORS,
    PATTERNS,
    BenchPlan,
    BenchReport,
    compare,
    emit_csv,
    load_report,
    run_plan,
)
from .errors import PoolError


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark the fixed-size pool against the system allocator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="time a workload grid and write a CSV")
    run.add_argument("--allocator", choices=(*ALLOCATORS, "both"), default="both")
    run.add_argument("--sizes", type=_int_list, default=[16, 64, 256],
                     metavar="BYTES[,BYTES...]")
    run.add_argument("--counts", type=_int_list, default=[1000, 100000],
                     metavar="N[,N...]")
    run.add_argument("--pattern", choices=PATTERNS, default="bulk")
    run.add_argument("--reps", type=int, default=3)
    run.add_argument("--seed", type=int, default=None, help="required for churn")
    run.add_argument("--out", default="results.csv")
    run.add_argument("--backend", choices=("auto", "numba", "pure"), default="auto")

    cmp_ = sub.add_parser("compare", help="print the speedup table from two CSVs")
    cmp_.add_argument("--pool", required=True, help="CSV with the pool rows")
    cmp_.add_argument("--system", required=True, help="CSV with the system rows")

    backends = sub.add_parser(
        "backends", help="compare the compiled and interpreted pool kernels"
    )
    backends.add_argument("--sizes", type=_int_list, default=[16, 64, 256],
                          metavar="BYTES[,BYTES...]")
    backends.add_argument("--counts", type=_int_list, default=[10000],
                          metavar="N[,N...]")
    backends.add_argument("--pattern", choices=PATTERNS, default="pairs")
    backends.add_argument("--reps", type=int, default=3)
    backends.add_argument("--seed", type=int, default=0)
    return parser


def _print_speedups(rows) -> None:
    print(f"{'block_size':>10} {'pattern':>8} {'op_count':>10} "
          f"{'pool ns/op':>12} {'system ns/op':>13} {'speedup':>8}")
    for row in rows:
        print(f"{row.block_size:>10} {row.pattern:>8} {row.op_count:>10} "
              f"{row.pool_ns_per_op:>12.2f} {row.system_ns_per_op:>13.2f} "
              f"{row.speedup:>7.2f}x")


def _cmd_run(args) -> int:
    allocators = list(ALLOCATORS) if args.allocator == "both" else [args.allocator]
    reports = {}
    combined = BenchReport()
    for allocator in allocators:
        plan = BenchPlan(
            allocator=allocator,
            block_sizes=tuple(args.sizes),
            op_counts=tuple(args.counts),
            pattern=args.pattern,
            repetitions=args.reps,
            seed=args.seed,
        )
        report = run_plan(plan, backend=args.backend)
        reports[allocator] = report
        combined.rows.extend(report.rows)
        combined.failures.extend(report.failures)
    emit_csv(combined, args.out)
    print(f"wrote {len(combined.rows)} rows to {args.out} "
          f"(backend={get_backend(args.backend).name})")
    if len(allocators) == 2:
        _print_speedups(compare(reports["pool"], reports["system"]))
    for failure in combined.failures:
        print(f"FAILED cell: {failure}", file=sys.stderr)
    return 1 if combined.failures else 0


def _cmd_compare(args) -> int:
    pool_report = load_report(args.pool, allocator="pool")
    system_report = load_report(args.system, allocator="system")
    _print_speedups(compare(pool_report, system_report))
    return 0


def _cmd_backends(args) -> int:
    if not jit_available():
        print("numba backend unavailable; nothing to compare", file=sys.stderr)
        return 1
    results = {}
    for backend in ("numba", "pure"):
        plan = BenchPlan(
            allocator="pool",
            block_sizes=tuple(args.sizes),
            op_counts=tuple(args.counts),
            pattern=args.pattern,
            repetitions=args.reps,
            seed=args.seed,
        )
        results[backend] = run_plan(plan, backend=backend)
    numba_cells = {}
    pure_cells = {}
    for backend, cells in (("numba", numba_cells), ("pure", pure_cells)):
        for row in results[backend].rows:
            if row.pattern == "create":
                continue
            cells.setdefault((row.block_size, row.op_count), []).append(row.ns_per_op)
    print(f"{'block_size':>10} {'op_count':>10} {'numba ns/op':>12} "
          f"{'pure ns/op':>12} {'jit speedup':>11}")
    for key in sorted(numba_cells):
        numba_ns = sorted(numba_cells[key])[len(numba_cells[key]) // 2]
        pure_ns = sorted(pure_cells[key])[len(pure_cells[key]) // 2]
        print(f"{key[0]:>10} {key[1]:>10} {numba_ns:>12.2f} {pure_ns:>12.2f} "
              f"{pure_ns / numba_ns:>10.1f}x")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_backends(args)
    except (PoolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
