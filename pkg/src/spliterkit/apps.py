"""The four benchmark applications, each in three execution modes.

``baseline``
    one map task per block.
``spliter``
    one map task per partition; the task walks its co-located blocks and
    pre-reduces locally.
``rechunk``
    materialise balanced blocks with :func:`~spliterkit.rechunk.rechunk`,
    then run the baseline.

Reductions fold partial results with arity 8 in ascending index order,
never in completion order, so results do not depend on thread timing.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .blocked import (BlockedArray, GaussianBlobs, LabeledBlobs, RoundRobin, UniformCube,
                      block_locations, create_array, create_labels)
from .checksum import fnv1a
from .kernels.histogram import HistogramSpec, histogramdd, sum_counts
from .kernels.kdtree import kdtree_build, kdtree_query, merge_kqueries_batch
from .kernels.kmeans import kmeans_merge, kmeans_partial, kmeans_recompute
from .kernels.smo import SvmModel, smo_train, svm_predict
from .rechunk import balanced_block_rows, rechunk
from .runtime import Metrics, Runtime, RuntimeConfig
from .spliter import split

APPS = ("histogram", "kmeans", "csvm", "knn")
MODES = ("baseline", "spliter", "rechunk")
MAP_KIND = {
    "histogram": "histogram_map",
    "kmeans": "kmeans_map",
    "csvm": "csvm_map",
    "knn": "knn_fit",
}
REDUCE_ARITY = 8


@dataclass
class AppConfig:
    app: str = "histogram"
    mode: str = "baseline"
    workers: int = 2
    threads_per_worker: int = 1
    blocks_per_worker: int = 4
    rows_per_worker: int = 8192
    n_rows: int | None = None
    block_rows: int | None = None
    dims: int = 3
    seed: int = 0
    partitions_per_worker: int = 1
    sched_overhead: int = 0
    bandwidth: float | None = None
    latency: int = 0
    inject_real_overhead: bool = False
    placement: object = field(default_factory=RoundRobin)
    # histogram
    bins: int = 8
    # kmeans
    k: int = 4
    iters: int = 10
    # csvm
    C: float = 1.0
    cascade_max_iter: int = 5
    separation: float = 10.0
    # knn
    knn_k: int = 5
    query_rows: int | None = None
    query_blocks: int | None = None

    def __post_init__(self):
        if self.app not in APPS:
            raise ValueError(f"unknown app {self.app!r}; expected one of {APPS}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        for name in ("workers", "threads_per_worker", "blocks_per_worker", "dims",
                     "partitions_per_worker", "bins", "k", "iters", "knn_k", "cascade_max_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.total_rows < 1:
            raise ValueError("dataset must have at least one row")
        if not 1 <= self.resolved_block_rows <= self.total_rows:
            raise ValueError(f"block_rows must be in [1, {self.total_rows}]")

    @property
    def total_rows(self):
        return self.n_rows if self.n_rows is not None else self.rows_per_worker * self.workers

    @property
    def resolved_block_rows(self):
        if self.block_rows is not None:
            return self.block_rows
        return max(1, -(-self.total_rows // (self.workers * self.blocks_per_worker)))

    @property
    def resolved_query_rows(self):
        return self.query_rows if self.query_rows is not None else max(1, self.total_rows // 6)

    @property
    def resolved_query_blocks(self):
        return self.query_blocks if self.query_blocks is not None else self.workers

    def runtime_config(self):
        return RuntimeConfig(
            num_workers=self.workers,
            threads_per_worker=self.threads_per_worker,
            sched_overhead=self.sched_overhead,
            bandwidth=self.bandwidth,
            latency=self.latency,
            inject_real_overhead=self.inject_real_overhead,
        )

    def with_mode(self, mode):
        return replace(self, mode=mode)


class HistogramRun(NamedTuple):
    counts: np.ndarray
    metrics: Metrics
    info: dict


class KMeansRun(NamedTuple):
    centers: np.ndarray
    inertia: list
    metrics: Metrics
    info: dict


class CSVMRun(NamedTuple):
    model: SvmModel
    accuracy: float
    metrics: Metrics
    info: dict


class KNNRun(NamedTuple):
    indexes: np.ndarray
    metrics: Metrics
    info: dict


# -- shared plumbing -----------------------------------------------------------

def tree_reduce(rt: Runtime, kind, items, combine, arity=REDUCE_ARITY):
    """Fold ``items`` (futures or refs) with ``combine(*values)``.

    Groups are formed left to right at every level, so the association
    order depends only on the item order.
    """
    items = list(items)
    if not items:
        raise ValueError("nothing to reduce")
    while len(items) > 1:
        items = [
            items[i] if len(items[i:i + arity]) == 1
            else rt.submit(kind, combine, items[i:i + arity])
            for i in range(0, len(items), arity)
        ]
    return items[0]


def _balanced(rt, arr):
    return rechunk(rt, arr, balanced_block_rows(arr, rt))


def make_data(cfg: AppConfig, rt: Runtime):
    """Generate and place the datasets an app needs."""
    n, dims, br = cfg.total_rows, cfg.dims, cfg.resolved_block_rows
    if cfg.app == "histogram":
        return {"x": create_array(rt, n, dims, br, cfg.placement, UniformCube(), cfg.seed)}
    if cfg.app == "kmeans":
        gen = GaussianBlobs(k=min(cfg.k, dims + 1))
        return {"x": create_array(rt, n, dims, br, cfg.placement, gen, cfg.seed)}
    if cfg.app == "csvm":
        x = create_array(rt, n, dims, br, cfg.placement, LabeledBlobs(cfg.separation), cfg.seed)
        return {"x": x, "y": create_labels(rt, x)}
    x = create_array(rt, n, dims, br, cfg.placement, UniformCube(), cfg.seed)
    qn = cfg.resolved_query_rows
    qbr = max(1, -(-qn // cfg.resolved_query_blocks))
    q = create_array(rt, qn, dims, qbr, RoundRobin(), UniformCube(), cfg.seed + 0x5EED)
    return {"x": x, "query": q}


def _run(cfg, rt, data, body):
    own = rt is None
    if own:
        rt = Runtime(cfg.runtime_config())
    try:
        if data is None:
            data = make_data(cfg, rt)
        before = rt.metrics_snapshot()
        out = body(cfg, rt, data, before)
        rt.wait_all()
        return out, rt.metrics_snapshot() - before
    finally:
        if own:
            rt.shutdown()


def _map_info(cfg, metrics, extra=None):
    info = {
        "map_tasks": metrics.tasks_by_kind.get(MAP_KIND[cfg.app], 0),
        "map_overhead_ns": metrics.overhead_by_kind.get(MAP_KIND[cfg.app], 0),
    }
    info.update(extra or {})
    return info


# -- histogram -------------------------------------------------------------------

def _histogram_partition(spec):
    def run(*blocks):
        return sum_counts([histogramdd(b, spec) for b in blocks])
    return run


def _histogram_body(cfg, rt, data, before):
    spec = HistogramSpec(cfg.dims, cfg.bins)
    kind = MAP_KIND["histogram"]
    arr = data["x"]
    if cfg.mode == "spliter":
        partials = [rt.submit(kind, _histogram_partition(spec), p.block_refs, worker=p.worker)
                    for p in split(rt, arr, cfg.partitions_per_worker)]
    else:
        if cfg.mode == "rechunk":
            arr = _balanced(rt, arr)
        partials = [rt.submit(kind, lambda b: histogramdd(b, spec), [ref]) for ref in arr.blocks]
    total = tree_reduce(rt, "histogram_reduce", partials, lambda *p: sum_counts(p))
    return rt.gather(total)


def run_histogram(cfg: AppConfig, rt: Runtime | None = None, data=None) -> HistogramRun:
    counts, metrics = _run(cfg, rt, data, _histogram_body)
    return HistogramRun(counts, metrics, _map_info(cfg, metrics))


# -- k-means ---------------------------------------------------------------------

def _kmeans_partition(centers):
    def run(*blocks):
        return kmeans_merge([kmeans_partial(b, centers) for b in blocks])
    return run


def _kmeans_body(cfg, rt, data, before):
    arr: BlockedArray = data["x"]
    if cfg.k > arr.n_rows:
        raise ValueError(f"k={cfg.k} exceeds the {arr.n_rows} available points")
    kind = MAP_KIND["kmeans"]
    centers = arr.generator.rows(arr.seed, 0, cfg.k, arr.dims)
    parts = None
    if cfg.mode == "spliter":
        parts = split(rt, arr, cfg.partitions_per_worker)
    elif cfg.mode == "rechunk":
        arr = _balanced(rt, arr)
    trace = []
    for _ in range(cfg.iters):
        c = centers
        if parts is not None:
            partials = [rt.submit(kind, _kmeans_partition(c), p.block_refs, worker=p.worker)
                        for p in parts]
        else:
            partials = [rt.submit(kind, lambda b, c=c: kmeans_partial(b, c), [ref])
                        for ref in arr.blocks]
        merged = rt.gather(tree_reduce(rt, "kmeans_reduce", partials,
                                       lambda *p: kmeans_merge(p)))
        trace.append(merged.inertia)
        centers = kmeans_recompute(merged.sums, merged.counts, centers)
    return centers, trace


def run_kmeans(cfg: AppConfig, rt: Runtime | None = None, data=None) -> KMeansRun:
    (centers, trace), metrics = _run(cfg, rt, data, _kmeans_body)
    return KMeansRun(centers, trace, metrics, _map_info(cfg, metrics))


# -- cascade SVM -------------------------------------------------------------------

def _union_support(models):
    """Support vectors of ``models``, deduplicated by global index, sorted by it."""
    pts = np.concatenate([m.support_points for m in models])
    lab = np.concatenate([m.support_labels for m in models])
    gidx = np.concatenate([m.support_global_indexes for m in models])
    gidx, first = np.unique(gidx, return_index=True)
    return pts[first], lab[first], gidx


def _csvm_level0(gidx, n_blocks, C, seed):
    def run(*values):
        pts = np.concatenate(values[:n_blocks])
        lab = np.concatenate(values[n_blocks:2 * n_blocks]).reshape(-1)
        idx = gidx
        if len(values) > 2 * n_blocks:
            fb = values[-1]
            new = ~np.isin(fb.support_global_indexes, idx)
            pts = np.concatenate([pts, fb.support_points[new]])
            lab = np.concatenate([lab, fb.support_labels[new]])
            idx = np.concatenate([idx, fb.support_global_indexes[new]])
        if not (np.any(lab > 0) and np.any(lab < 0)):
            raise ValueError(
                f"a cascade input group (rows {int(idx.min())}..{int(idx.max())}) holds a single "
                "class; use larger blocks")
        return smo_train(pts, lab, C, global_indexes=idx, seed=seed)
    return run


def _csvm_merge(C, seed):
    def run(*models):
        pts, lab, gidx = _union_support(models)
        return smo_train(pts, lab, C, global_indexes=gidx, seed=seed)
    return run


def _csvm_score(pts, lab, model):
    return int(np.sum(svm_predict(model, pts) == lab.reshape(-1)))


def _csvm_body(cfg, rt, data, before):
    x, y = data["x"], data["y"]
    kind = MAP_KIND["csvm"]
    if cfg.mode == "spliter":
        groups = []
        for p in split(rt, x, cfg.partitions_per_worker):
            labels = [y.blocks[i] for i in p.get_indexes()]
            groups.append((list(p.block_refs) + labels, p.get_item_indexes(), len(p), p.worker))
    else:
        if cfg.mode == "rechunk":
            x, y = _balanced(rt, x), _balanced(rt, y)
        groups = [([xb, yb], np.arange(*x.block_range(i), dtype=np.int64), 1, None)
                  for i, (xb, yb) in enumerate(zip(x.blocks, y.blocks))]

    final, previous, iterations = None, None, 0
    for _ in range(cfg.cascade_max_iter):
        iterations += 1
        level = []
        for inputs, gidx, nb, worker in groups:
            ins = inputs + ([final] if final is not None else [])
            level.append(rt.submit(kind, _csvm_level0(gidx, nb, cfg.C, cfg.seed), ins, worker=worker))
        while len(level) > 1:
            nxt = [rt.submit("csvm_merge", _csvm_merge(cfg.C, cfg.seed), level[i:i + 2])
                   for i in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        final = level[0]
        support = frozenset(rt.gather(final).support_global_indexes.tolist())
        if support == previous:
            break
        previous = support

    model = rt.gather(final)
    scores = [rt.submit("csvm_score", _csvm_score, [xb, yb, final])
              for xb, yb in zip(x.blocks, y.blocks)]
    correct = sum(rt.gather(s) for s in scores)
    return model, correct / x.n_rows, iterations


def run_csvm(cfg: AppConfig, rt: Runtime | None = None, data=None) -> CSVMRun:
    (model, accuracy, iterations), metrics = _run(cfg, rt, data, _csvm_body)
    return CSVMRun(model, accuracy, metrics,
                   _map_info(cfg, metrics, {"cascade_iterations": iterations,
                                            "n_support": model.n_support}))


# -- k-nearest neighbours ------------------------------------------------------------

class FitTree(NamedTuple):
    tree: object
    global_index: np.ndarray


def _fit_blocks(gidx):
    def run(*blocks):
        pts = blocks[0] if len(blocks) == 1 else np.concatenate(blocks)
        return FitTree(kdtree_build(pts), gidx)
    return run


def _lookup(k):
    def run(fit, queries):
        d, local, evals = kdtree_query(fit.tree, queries, k)
        return d, fit.global_index[local], evals
    return run


def _merge_lookups(k):
    def run(*parts):
        d, idx = merge_kqueries_batch(parts, k)
        return d, idx, sum(p[2] for p in parts)
    return run


def _knn_body(cfg, rt, data, before):
    x, query = data["x"], data["query"]
    k = cfg.knn_k
    if k > x.n_rows:
        raise ValueError(f"k={k} exceeds the {x.n_rows} fit points")
    if x.dims != query.dims:
        raise ValueError("fit and query data must share dimensionality")
    kind = MAP_KIND["knn"]
    if cfg.mode == "spliter":
        trees = [rt.submit(kind, _fit_blocks(p.get_item_indexes()), p.block_refs, worker=p.worker)
                 for p in split(rt, x, cfg.partitions_per_worker)]
    else:
        if cfg.mode == "rechunk":
            x = rechunk(rt, x, -(-x.n_rows // rt.num_workers))
        trees = [rt.submit(kind, _fit_blocks(np.arange(*x.block_range(i), dtype=np.int64)), [ref])
                 for i, ref in enumerate(x.blocks)]
    for t in trees:
        t.wait()
    fit_metrics = rt.metrics_snapshot() - before

    merges = []
    for qref, qowner in zip(query.blocks, block_locations(rt, query)):
        lookups = [rt.submit("knn_lookup", _lookup(k), [t, qref], worker=t.worker) for t in trees]
        merges.append(rt.submit("knn_merge", _merge_lookups(k), lookups, worker=qowner))
    results = [rt.gather(m) for m in merges]
    dist = np.concatenate([r[0] for r in results])
    idx = np.concatenate([r[1] for r in results])
    evals = sum(int(r[2]) for r in results)
    return idx, dist, evals, len(trees), fit_metrics


def run_knn(cfg: AppConfig, rt: Runtime | None = None, data=None) -> KNNRun:
    (idx, dist, evals, n_trees, fit_metrics), metrics = _run(cfg, rt, data, _knn_body)
    return KNNRun(idx, metrics, _map_info(cfg, metrics, {
        "distances": dist, "distance_evals": evals, "trees": n_trees, "fit_metrics": fit_metrics,
    }))


RUNNERS = {"histogram": run_histogram, "kmeans": run_kmeans, "csvm": run_csvm, "knn": run_knn}


def run_app(cfg: AppConfig, rt: Runtime | None = None, data=None):
    return RUNNERS[cfg.app](cfg, rt, data)


def result_checksum(run):
    """64-bit digest of an app's primary output."""
    if isinstance(run, HistogramRun):
        return fnv1a(run.counts)
    if isinstance(run, KMeansRun):
        return fnv1a(run.centers, np.asarray(run.inertia))
    if isinstance(run, CSVMRun):
        m = run.model
        return fnv1a(np.sort(m.support_global_indexes), np.asarray([m.bias, run.accuracy]))
    if isinstance(run, KNNRun):
        return fnv1a(run.indexes)
    raise TypeError(f"no checksum for {type(run).__name__}")


def timed_run(cfg: AppConfig):
    """Run one cell on a fresh runtime; wall time excludes data generation."""
    with Runtime(cfg.runtime_config()) as rt:
        data = make_data(cfg, rt)
        t0 = time.perf_counter()
        run = run_app(cfg, rt, data)
        wall_ms = (time.perf_counter() - t0) * 1e3
    return run, wall_ms
