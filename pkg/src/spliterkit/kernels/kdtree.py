"""Exact k-nearest-neighbour search: KD-tree, brute force, result merging.

Neighbours are ordered by ``(squared distance, index)``. Searches report
how many point-distance evaluations they performed; that count is the
work measure used by the tree-size experiments.
"""
from __future__ import annotations

import numba
import numpy as np

LEAF_SIZE = 16


class KdTree:
    """Median-split KD-tree over a private copy of ``points``.

    Nodes are stored in flat arrays; ``left == -1`` marks a leaf whose
    points are ``perm[start:end]`` (local indexes into ``points``).
    """

    def __init__(self, points, perm, split_dim, split_val, left, right, start, end, leaf_size):
        self.points = points
        self.perm = perm
        self.split_dim = split_dim
        self.split_val = split_val
        self.left = left
        self.right = right
        self.start = start
        self.end = end
        self.leaf_size = leaf_size

    def __len__(self):
        return len(self.points)

    @property
    def n_nodes(self):
        return len(self.left)

    @property
    def nbytes(self):
        return int(sum(a.nbytes for a in (self.points, self.perm, self.split_dim, self.split_val,
                                          self.left, self.right, self.start, self.end)))

    def leaves(self):
        return [self.perm[self.start[i]:self.end[i]] for i in range(self.n_nodes) if self.left[i] < 0]

    def depth(self):
        def walk(node):
            if self.left[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)


def kdtree_build(points, leaf_size=LEAF_SIZE) -> KdTree:
    """Build by recursive lower-median splits, split dim = depth mod dims.

    Points are ordered by (value, local index) before taking the median,
    so the tree is a deterministic function of the input. A node whose
    points all share the split coordinate becomes a leaf.
    """
    pts = np.array(points, dtype=np.float64, order="C", copy=True)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n, dims = pts.shape
    split_dim, split_val, left, right, start, end = [], [], [], [], [], []
    perm = []

    def new_node():
        for lst in (split_dim, split_val, left, right, start, end):
            lst.append(-1 if lst is not split_val else 0.0)
        return len(left) - 1

    root = new_node()
    stack = [(root, np.arange(n, dtype=np.int64), 0)]
    while stack:
        node, idx, depth = stack.pop()
        dim = depth % dims if dims else 0
        vals = pts[idx, dim] if len(idx) else idx
        if len(idx) <= leaf_size or vals.min() == vals.max():
            start[node] = len(perm)
            perm.extend(idx.tolist())
            end[node] = len(perm)
            continue
        order = np.lexsort((idx, vals))
        m = (len(idx) - 1) // 2
        split_dim[node] = dim
        split_val[node] = float(vals[order[m]])
        lchild, rchild = new_node(), new_node()
        left[node], right[node] = lchild, rchild
        # right pushed first so the left subtree is laid out first in perm
        stack.append((rchild, idx[order[m + 1:]], depth + 1))
        stack.append((lchild, idx[order[:m + 1]], depth + 1))

    as_i = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
    return KdTree(pts, as_i(perm), as_i(split_dim), np.asarray(split_val, dtype=np.float64),
                  as_i(left), as_i(right), as_i(start), as_i(end), leaf_size)


@numba.njit(cache=True)
def _insert(out_d, out_i, count, k, d, idx):
    if count == k:
        if d > out_d[k - 1] or (d == out_d[k - 1] and idx > out_i[k - 1]):
            return count
        pos = k - 1
    else:
        pos = count
        count += 1
    while pos > 0 and (out_d[pos - 1] > d or (out_d[pos - 1] == d and out_i[pos - 1] > idx)):
        out_d[pos] = out_d[pos - 1]
        out_i[pos] = out_i[pos - 1]
        pos -= 1
    out_d[pos] = d
    out_i[pos] = idx
    return count


@numba.njit(cache=True)
def _query_one(points, perm, split_dim, split_val, left, right, start, end, q, k, out_d, out_i):
    dims = points.shape[1]
    stack_node = np.empty(len(left) + 1, dtype=np.int64)
    stack_bound = np.empty(len(left) + 1, dtype=np.float64)
    top = 0
    stack_node[0] = 0
    stack_bound[0] = 0.0
    top = 1
    count = 0
    evals = 0
    while top > 0:
        top -= 1
        node = stack_node[top]
        bound = stack_bound[top]
        # strict: an equal bound may still hold a lower-index tie
        if count == k and bound > out_d[k - 1]:
            continue
        if left[node] < 0:
            for t in range(start[node], end[node]):
                p = perm[t]
                d = 0.0
                for j in range(dims):
                    diff = q[j] - points[p, j]
                    d += diff * diff
                evals += 1
                count = _insert(out_d, out_i, count, k, d, p)
            continue
        diff = q[split_dim[node]] - split_val[node]
        far_bound = diff * diff
        if far_bound < bound:
            far_bound = bound
        if diff <= 0.0:
            near, far = left[node], right[node]
        else:
            near, far = right[node], left[node]
        stack_node[top] = far
        stack_bound[top] = far_bound
        top += 1
        stack_node[top] = near
        stack_bound[top] = bound
        top += 1
    return count, evals


@numba.njit(cache=True)
def _query_batch(points, perm, split_dim, split_val, left, right, start, end, queries, k):
    m = queries.shape[0]
    out_d = np.empty((m, k), dtype=np.float64)
    out_i = np.empty((m, k), dtype=np.int64)
    total = 0
    for r in range(m):
        _, evals = _query_one(points, perm, split_dim, split_val, left, right, start, end,
                              queries[r], k, out_d[r], out_i[r])
        total += evals
    return out_d, out_i, total


def _tree_args(tree):
    return (tree.points, tree.perm, tree.split_dim, tree.split_val,
            tree.left, tree.right, tree.start, tree.end)


def kdtree_query(tree: KdTree, queries, k):
    """Batch search: ``(dist2, local_idx, evals)`` with ``min(k, len(tree))`` columns."""
    if k < 1:
        raise ValueError("k must be >= 1")
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != tree.points.shape[1]:
        raise ValueError("query dimensionality does not match the tree")
    kk = min(k, len(tree))
    if kk == 0:
        m = len(queries)
        return np.empty((m, 0)), np.empty((m, 0), dtype=np.int64), 0
    d, i, evals = _query_batch(*_tree_args(tree), queries, kk)
    return d, i, int(evals)


def kdtree_knn(tree: KdTree, query, k):
    """``([(dist2, local_index), ...], evals)`` for a single query point."""
    d, i, evals = kdtree_query(tree, np.asarray(query, dtype=np.float64).reshape(1, -1), k)
    return [(float(a), int(b)) for a, b in zip(d[0], i[0])], evals


def brute_query(points, queries, k):
    """Exhaustive search with the same arithmetic as the tree (per-dim accumulation)."""
    points = np.asarray(points, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64).reshape(-1, points.shape[1])
    n = len(points)
    kk = min(k, n)
    out_d = np.empty((len(queries), kk))
    out_i = np.empty((len(queries), kk), dtype=np.int64)
    local = np.arange(n)
    for r, q in enumerate(queries):
        d = np.zeros(n)
        for j in range(points.shape[1]):
            diff = q[j] - points[:, j]
            d += diff * diff
        order = np.lexsort((local, d))[:kk]
        out_d[r] = d[order]
        out_i[r] = order
    return out_d, out_i, n * len(queries)


def brute_knn(points, query, k):
    d, i, evals = brute_query(points, np.asarray(query, dtype=np.float64).reshape(1, -1), k)
    return [(float(a), int(b)) for a, b in zip(d[0], i[0])], evals


def merge_kqueries(parts, k):
    """Globally smallest ``k`` of several ``[(dist2, global_index), ...]`` lists."""
    pool = [(float(d), int(i)) for part in parts for d, i in part]
    return sorted(pool)[:k]


def merge_kqueries_batch(parts, k):
    """Row-wise merge of ``(dist2, global_idx)`` array pairs, ties by lower index."""
    d = np.concatenate([p[0] for p in parts], axis=1)
    i = np.concatenate([p[1] for p in parts], axis=1)
    order = np.lexsort((i, d), axis=-1)[:, :k]
    return np.take_along_axis(d, order, axis=1), np.take_along_axis(i, order, axis=1)
