"""Experiment grids, CSV output and robust timing statistics."""
from __future__ import annotations

import csv
import itertools
import logging
import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .apps import APPS, MODES, AppConfig, CSVMRun, HistogramRun, KMeansRun, KNNRun, result_checksum, timed_run

logger = logging.getLogger(__name__)

CSV_HEADER = [
    "app", "mode", "workers", "threads_per_worker", "blocks_per_worker", "block_rows", "dims",
    "seed", "rep", "wall_ms", "map_tasks", "total_tasks", "bytes_transferred", "transfers",
    "locality_hits", "accounted_overhead_ns", "virtual_transfer_ns", "result_checksum", "extra",
]
COUNTER_COLUMNS = CSV_HEADER[10:18]
AGGREGATE_REP = -1
BLOCK_SWEEP = (1, 4, 16, 48)


def winsorized_mean(samples, limit=0.05):
    """Mean after clamping samples to their ``limit`` / ``1 - limit`` percentiles."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no samples")
    lo, hi = np.percentile(x, [100 * limit, 100 * (1 - limit)])
    return float(np.clip(x, lo, hi).mean())


def iqr(samples):
    q1, q3 = np.percentile(np.asarray(samples, dtype=np.float64), [25, 75])
    return float(q3 - q1)


@dataclass
class Grid:
    """Cartesian product of app x mode x workers x blocks_per_worker x seed.

    ``base`` holds the remaining :class:`AppConfig` fields shared by all cells.
    """

    apps: tuple = ("histogram",)
    modes: tuple = MODES
    workers: tuple = (2,)
    blocks_per_worker: tuple = (4,)
    seeds: tuple = (0,)
    reps: int = 1
    base: dict = field(default_factory=dict)

    def cells(self):
        for app, mode, w, bpw, seed in itertools.product(
                self.apps, self.modes, self.workers, self.blocks_per_worker, self.seeds):
            yield dict(self.base, app=app, mode=mode, workers=w, blocks_per_worker=bpw, seed=seed)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_extras(run):
    if isinstance(run, HistogramRun):
        return {"total_count": int(run.counts.sum())}
    if isinstance(run, KMeansRun):
        return {"inertia": run.inertia[-1], "iters": len(run.inertia)}
    if isinstance(run, CSVMRun):
        return {"accuracy": run.accuracy, "n_support": run.info["n_support"],
                "cascade_iterations": run.info["cascade_iterations"]}
    if isinstance(run, KNNRun):
        return {"distance_evals": run.info["distance_evals"], "trees": run.info["trees"]}
    return {}


def format_extra(extra):
    return ";".join(f"{k}={_fmt(v)}" for k, v in extra.items())


def cell_row(cfg: AppConfig, rep, run, wall_ms):
    m = run.metrics
    return {
        "app": cfg.app, "mode": cfg.mode, "workers": cfg.workers,
        "threads_per_worker": cfg.threads_per_worker, "blocks_per_worker": cfg.blocks_per_worker,
        "block_rows": cfg.resolved_block_rows, "dims": cfg.dims, "seed": cfg.seed, "rep": rep,
        "wall_ms": wall_ms, "map_tasks": run.info["map_tasks"], "total_tasks": m.tasks_submitted,
        "bytes_transferred": m.bytes_transferred, "transfers": m.transfers,
        "locality_hits": m.locality_hits, "accounted_overhead_ns": m.accounted_overhead,
        "virtual_transfer_ns": m.virtual_transfer_time,
        "result_checksum": f"{result_checksum(run):016x}",
        "extra": format_extra(run_extras(run)),
    }


def aggregate_row(rows):
    walls = [r["wall_ms"] for r in rows]
    out = dict(rows[0])
    out["rep"] = AGGREGATE_REP
    out["wall_ms"] = winsorized_mean(walls)
    extra = [out["extra"]] if out["extra"] else []
    extra.append(f"iqr_ms={_fmt(iqr(walls))}")
    if any(r[c] != rows[0][c] for r in rows for c in COUNTER_COLUMNS):
        extra.append("nondeterministic=1")
        warnings.warn(f"counters differ across repetitions of {out['app']}/{out['mode']}")
    out["extra"] = ";".join(extra)
    return out


def warning_row(params, message):
    row = {c: "" for c in CSV_HEADER}
    for key in ("app", "mode", "workers", "blocks_per_worker", "seed"):
        row[key] = params.get(key, "")
    row["extra"] = f"warning={message}"
    return row


def run_experiment(grid: Grid, progress=None):
    """One CSV row per (cell, repetition) plus one aggregate row per cell."""
    out = []
    for params in grid.cells():
        try:
            cfg = AppConfig(**params)
        except (TypeError, ValueError) as exc:
            warnings.warn(f"skipping cell {params}: {exc}")
            out.append(warning_row(params, str(exc).replace(",", ";")))
            continue
        rows = []
        for rep in range(grid.reps):
            run, wall_ms = timed_run(cfg)
            rows.append(cell_row(cfg, rep, run, wall_ms))
            if progress:
                progress(rows[-1])
        out.extend(rows)
        if rows:
            out.append(aggregate_row(rows))
    return out


def write_csv(rows, dest=None):
    """Write rows with the fixed header to ``dest`` (path or file), default stdout."""
    def emit(fh):
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _fmt(r[k]) for k in CSV_HEADER})

    if dest is None:
        emit(sys.stdout)
    elif hasattr(dest, "write"):
        emit(dest)
    else:
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def relative_difference(a, b):
    """Largest element difference relative to the largest magnitude in ``a``."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    scale = float(np.max(np.abs(a))) or 1.0
    return float(np.max(np.abs(a - b))) / scale


def compare_modes(runs):
    """Check that runs of one app across modes agree; returns ``(ok, message)``."""
    modes = list(runs)
    ref = runs[modes[0]]
    problems = []
    for mode in modes[1:]:
        r = runs[mode]
        if isinstance(ref, HistogramRun):
            if not np.array_equal(ref.counts, r.counts):
                problems.append(f"{mode}: histogram counts differ")
        elif isinstance(ref, KMeansRun):
            rel = relative_difference(ref.centers, r.centers)
            if not rel <= 1e-9:
                problems.append(f"{mode}: centers differ by {rel:.3g} relative")
        elif isinstance(ref, CSVMRun):
            if abs(ref.accuracy - r.accuracy) > 0.01:
                problems.append(f"{mode}: accuracy {r.accuracy:.4f} vs {ref.accuracy:.4f}")
        elif isinstance(ref, KNNRun):
            if not np.array_equal(ref.indexes, r.indexes):
                problems.append(f"{mode}: neighbour indexes differ")
    if problems:
        return False, "; ".join(problems)
    return True, f"{ref.__class__.__name__[:-3].lower()} results agree across modes {', '.join(modes)}"


def verify_app(cfg: AppConfig, modes=MODES):
    runs = {m: timed_run(replace(cfg, mode=m))[0] for m in modes}
    ok, message = compare_modes(runs)
    return ok, message, runs


__all__ = [
    "APPS", "MODES", "BLOCK_SWEEP", "CSV_HEADER", "Grid", "run_experiment", "write_csv", "read_csv",
    "winsorized_mean", "iqr", "compare_modes", "verify_app",
]
