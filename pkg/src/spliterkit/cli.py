"""``spliter-bench``: run, sweep and verify the benchmark apps.

Exit status: 0 on success, 1 when ``verify`` finds a mismatch, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import sys

from .apps import APPS, MODES, AppConfig
from .bench import BLOCK_SWEEP, Grid, run_experiment, verify_app, write_csv


def _modes(text):
    modes = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"mode must be a comma list of {', '.join(MODES)}")
    return modes


def build_parser():
    parser = argparse.ArgumentParser(prog="spliter-bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="{bench,sweep,verify}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("app", choices=APPS)
    common.add_argument("--workers", type=int, nargs="+", default=[2])
    common.add_argument("--threads-per-worker", type=int, default=1)
    common.add_argument("--blocks-per-worker", type=int, nargs="+", default=None)
    common.add_argument("--rows-per-worker", type=int, default=8192)
    common.add_argument("--block-rows", type=int, default=None)
    common.add_argument("--mode", type=_modes, default=MODES,
                        help="comma-separated modes (default: all)")
    common.add_argument("--partitions-per-worker", type=int, default=1)
    common.add_argument("--sched-overhead-us", type=float, default=0.0)
    common.add_argument("--real-overhead", action="store_true",
                        help="also sleep the scheduling overhead for real")
    common.add_argument("--bandwidth-mbps", type=float, default=None,
                        help="virtual link bandwidth in megabits/s (default unlimited)")
    common.add_argument("--latency-us", type=float, default=0.0)
    common.add_argument("--seed", type=int, nargs="+", default=[0])
    common.add_argument("--reps", type=int, default=1)
    common.add_argument("--csv", default=None, help="write results here instead of stdout")
    common.add_argument("--dims", type=int, default=3)
    common.add_argument("--bins", type=int, default=8)
    common.add_argument("--k", type=int, default=4)
    common.add_argument("--iters", type=int, default=10)
    common.add_argument("--C", type=float, default=1.0)
    common.add_argument("--knn-k", type=int, default=5)
    common.add_argument("--query-rows", type=int, default=None)
    common.add_argument("--query-blocks", type=int, default=None)

    sub.add_parser("bench", parents=[common], help="run one grid of cells")
    sub.add_parser("sweep", parents=[common],
                   help=f"block sweep, blocks per worker {list(BLOCK_SWEEP)} by default")
    sub.add_parser("verify", parents=[common], help="check that all modes agree")
    return parser


def _base(args):
    return dict(
        threads_per_worker=args.threads_per_worker,
        rows_per_worker=args.rows_per_worker,
        block_rows=args.block_rows,
        dims=args.dims,
        partitions_per_worker=args.partitions_per_worker,
        sched_overhead=int(round(args.sched_overhead_us * 1e3)),
        inject_real_overhead=args.real_overhead,
        bandwidth=None if args.bandwidth_mbps is None else args.bandwidth_mbps * 1e6 / 8,
        latency=int(round(args.latency_us * 1e3)),
        bins=args.bins, k=args.k, iters=args.iters, C=args.C,
        knn_k=args.knn_k, query_rows=args.query_rows, query_blocks=args.query_blocks,
    )


def _progress(row):
    print(f"{row['app']:<9} {row['mode']:<8} w={row['workers']} bpw={row['blocks_per_worker']} "
          f"rep={row['rep']} wall={row['wall_ms']:.1f}ms map_tasks={row['map_tasks']} "
          f"bytes={row['bytes_transferred']}", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    base = _base(args)
    if args.command == "verify":
        status = 0
        for workers in args.workers:
            for bpw in args.blocks_per_worker or [4]:
                for seed in args.seed:
                    try:
                        cfg = AppConfig(app=args.app, workers=workers, blocks_per_worker=bpw,
                                        seed=seed, **base)
                    except ValueError as exc:
                        print(f"spliter-bench: error: {exc}", file=sys.stderr)
                        return 2
                    ok, message, _ = verify_app(cfg, args.mode)
                    tag = "OK" if ok else "MISMATCH"
                    print(f"[{tag}] {args.app} workers={workers} blocks_per_worker={bpw} "
                          f"seed={seed}: {message}")
                    status = status or (0 if ok else 1)
        return status

    default_bpw = list(BLOCK_SWEEP) if args.command == "sweep" else [4]
    grid = Grid(apps=(args.app,), modes=args.mode, workers=tuple(args.workers),
                blocks_per_worker=tuple(args.blocks_per_worker or default_bpw),
                seeds=tuple(args.seed), reps=args.reps, base=base)
    rows = run_experiment(grid, progress=_progress)
    write_csv(rows, args.csv)
    if args.csv:
        print(f"wrote {len(rows)} rows to {args.csv}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
