"""
A small block-count sweep
=========================

``run_experiment`` walks a grid of cells and returns CSV-ready rows, one
per repetition plus an aggregate (``rep = -1``) with a winsorized mean.
"""
import io

from spliterkit.bench import BLOCK_SWEEP, Grid, run_experiment, write_csv

grid = Grid(apps=("histogram",), modes=("baseline", "spliter"),
            blocks_per_worker=BLOCK_SWEEP, reps=3,
            base=dict(rows_per_worker=4800, sched_overhead=50_000))
rows = run_experiment(grid)

for r in rows:
    if r["rep"] == -1:
        print(r["mode"], r["blocks_per_worker"], r["map_tasks"],
              r["accounted_overhead_ns"], f"{r['wall_ms']:.2f} ms")

buf = io.StringIO()
write_csv(rows[:2], buf)
print(buf.getvalue())
