import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spliterkit.kernels import (HistogramSpec, SvmModel, brute_knn, brute_query, histogramdd,
                                kdtree_build, kdtree_knn, kdtree_query, kmeans_merge,
                                kmeans_partial, kmeans_recompute, merge_kqueries,
                                merge_kqueries_batch, smo_train, sum_counts, svm_predict)
from spliterkit.kernels.kmeans import inertia


# -- histogram ----------------------------------------------------------------

def test_histogram_1d_example():
    spec = HistogramSpec(1, 3, lo=(0.0,), hi=(3.0,))
    assert histogramdd(np.array([[0.5], [1.5], [2.5]]), spec).tolist() == [1, 1, 1]


def test_histogram_empty_block():
    spec = HistogramSpec(2, 4)
    assert not histogramdd(np.empty((0, 2)), spec).any()


def test_histogram_2d_bin():
    counts = histogramdd(np.array([[0.25, 0.75]]), HistogramSpec(2, 2))
    assert counts[0, 1] == 1 and counts.sum() == 1


def test_histogram_edges_and_outliers():
    spec = HistogramSpec(1, 4)
    counts, dropped = histogramdd(np.array([[1.0], [0.0], [-0.1], [1.1], [np.nan]]), spec,
                                  return_discarded=True)
    assert counts.tolist() == [1, 0, 0, 1] and dropped == 3


def test_histogram_spec_validation():
    with pytest.raises(ValueError):
        HistogramSpec(2, 0)
    with pytest.raises(ValueError):
        HistogramSpec(1, 2, lo=(1.0,), hi=(1.0,))


@pytest.mark.parametrize("seed", range(100))
def test_histogram_conservation_and_numpy_agreement(seed):
    rng = np.random.default_rng(seed)
    dims = 1 + seed % 3
    block = rng.uniform(-0.2, 1.2, size=(rng.integers(0, 300), dims))
    spec = HistogramSpec(dims, 5)
    counts, dropped = histogramdd(block, spec, return_discarded=True)
    assert counts.sum() + dropped == len(block)
    expected, _ = np.histogramdd(block, bins=5, range=[(0, 1)] * dims)
    assert np.array_equal(counts, expected.astype(np.int64))


def test_sum_counts():
    assert not sum_counts([np.zeros(3, int), np.zeros(3, int)]).any()
    assert sum_counts([np.array([1, 0]), np.array([0, 2])]).tolist() == [1, 2]
    parts = [np.random.default_rng(i).integers(0, 9, size=(3, 3)) for i in range(5)]
    assert np.array_equal(sum_counts(parts), sum_counts(parts[::-1]))
    with pytest.raises(ValueError):
        sum_counts([])


# -- k-means ------------------------------------------------------------------

def test_kmeans_single_center():
    block = np.random.default_rng(0).normal(size=(50, 3))
    p = kmeans_partial(block, np.zeros((1, 3)))
    assert np.array_equal(p.sums[0], block.sum(axis=0)) and p.counts.tolist() == [50]


def test_kmeans_tie_goes_to_lowest_center():
    p = kmeans_partial(np.array([[0.0, 0.0]]), np.array([[1.0, 0.0], [-1.0, 0.0]]))
    assert p.counts.tolist() == [1, 0]


def test_kmeans_centers_from_points():
    block = np.array([[0.0, 1.0], [5.0, 5.0]])
    assert kmeans_partial(block, block.copy()).counts.tolist() == [1, 1]


def test_kmeans_dim_mismatch():
    with pytest.raises(ValueError):
        kmeans_partial(np.zeros((3, 2)), np.zeros((2, 3)))


def test_kmeans_merge():
    rng = np.random.default_rng(1)
    centers = rng.normal(size=(3, 2))
    a, b, c = (kmeans_partial(rng.normal(size=(20, 2)), centers) for _ in range(3))
    one = kmeans_merge([a])
    assert np.array_equal(one.sums, a.sums) and np.array_equal(one.counts, a.counts)
    doubled = kmeans_merge([a, a])
    assert np.array_equal(doubled.sums, 2 * a.sums) and np.array_equal(doubled.counts, 2 * a.counts)
    nested, flat = kmeans_merge([kmeans_merge([a, b]), c]), kmeans_merge([a, b, c])
    assert np.array_equal(nested.counts, flat.counts)
    assert np.array_equal(nested.sums, flat.sums)


def test_kmeans_recompute_rules():
    block = np.random.default_rng(2).normal(size=(40, 2))
    p = kmeans_partial(block, np.zeros((1, 2)))
    assert np.allclose(kmeans_recompute(p.sums, p.counts, np.zeros((1, 2)))[0], block.mean(axis=0))
    old = np.array([[1.0, 1.0], [9.0, 9.0]])
    new = kmeans_recompute(np.array([[2.0, 4.0], [0.0, 0.0]]), np.array([2, 0]), old)
    assert new.tolist() == [[1.0, 2.0], [9.0, 9.0]]


def test_kmeans_square_hand_computation():
    square = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    centers = np.array([[0.0, 0.0], [1.0, 0.0]])
    p = kmeans_partial(square, centers)
    assert kmeans_recompute(p.sums, p.counts, centers).tolist() == [[0.0, 0.5], [1.0, 0.5]]


@pytest.mark.parametrize("seed", range(50))
def test_lloyd_inertia_non_increasing(seed):
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(200, 3)) + rng.integers(0, 3, size=(200, 1)) * 4
    blocks = np.array_split(points, 5)
    centers = points[:4].copy()
    trace = []
    for _ in range(10):
        merged = kmeans_merge([kmeans_partial(b, centers) for b in blocks])
        trace.append(merged.inertia)
        centers = kmeans_recompute(merged.sums, merged.counts, centers)
    trace.append(inertia(points, centers))
    assert all(b <= a * (1 + 1e-9) for a, b in zip(trace, trace[1:]))


# -- SMO ----------------------------------------------------------------------

def test_smo_two_point_analytic_separator():
    model = smo_train(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([-1.0, 1.0]), C=10)
    w = (model.alphas * model.support_labels) @ model.support_points
    assert np.allclose(w, [1.0, 0.0]) and np.isclose(model.bias, -1.0)
    assert svm_predict(model, [[0.5, 0.0], [1.5, 0.0]]).tolist() == [-1.0, 1.0]


def test_smo_separable_four_points():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [3.0, 0.0], [3.0, 1.0]])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    model = smo_train(x, y, C=10)
    assert np.array_equal(svm_predict(model, x), y)


def test_smo_retrain_on_support_set():
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(size=(40, 2)), rng.normal(size=(40, 2)) + [5, 0]])
    y = np.repeat([-1.0, 1.0], 40)
    model = smo_train(x, y, C=1.0)
    again = smo_train(model.support_points, model.support_labels, C=1.0,
                      global_indexes=model.support_global_indexes)
    assert np.array_equal(svm_predict(model, x), svm_predict(again, x))
    assert set(again.support_global_indexes) <= set(model.support_global_indexes)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(4, 60), C=st.floats(0.1, 10))
def test_smo_dual_feasibility(seed, n, C):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    y = np.where(np.arange(n) % 2 == 0, -1.0, 1.0)
    x[y > 0, 0] += 1.0
    model = smo_train(x, y, C=C, seed=seed)
    assert np.all(model.alphas >= 0) and np.all(model.alphas <= C + 1e-12)
    assert abs(np.sum(model.alphas * model.support_labels)) <= 1e-6
    # support vectors are rows of the input
    assert np.array_equal(model.support_points, x[model.support_global_indexes])


def test_smo_is_deterministic():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(50, 3))
    y = np.sign(x[:, 0] + 0.1)
    a, b = smo_train(x, y, seed=3), smo_train(x, y, seed=3)
    assert np.array_equal(a.alphas, b.alphas) and a.bias == b.bias


def test_smo_rejects_single_class():
    with pytest.raises(ValueError, match="each class"):
        smo_train(np.zeros((3, 2)), np.ones(3))
    with pytest.raises(ValueError):
        smo_train(np.zeros((2, 2)), np.array([0.0, 1.0]))


def test_predict_boundary_and_order():
    m = SvmModel(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, -1.0]),
                 np.array([0.5, 0.5]), 0.0, np.array([0, 1]))
    assert svm_predict(m, [[0.0, 3.0], [2.0, 0.0]]).tolist() == [1.0, 1.0]
    perm = SvmModel(m.support_points[::-1], m.support_labels[::-1], m.alphas[::-1], 0.0,
                    m.support_global_indexes[::-1])
    pts = np.random.default_rng(0).normal(size=(30, 2))
    assert np.array_equal(svm_predict(m, pts), svm_predict(perm, pts))


# -- KD-tree ------------------------------------------------------------------

def test_small_tree_is_one_leaf():
    tree = kdtree_build(np.random.default_rng(0).random((16, 3)))
    assert tree.n_nodes == 1 and len(tree.leaves()[0]) == 16


def test_seventeen_points_split_at_lower_median():
    pts = np.random.default_rng(1).random((17, 2))
    tree = kdtree_build(pts)
    assert tree.split_dim[0] == 0
    assert tree.split_val[0] == np.sort(pts[:, 0])[8]
    left, right = tree.leaves()
    assert len(left) == 9 and len(right) == 8
    assert pts[left, 0].max() <= tree.split_val[0] <= pts[right, 0].min()


def test_identical_points_make_a_leaf():
    tree = kdtree_build(np.ones((100, 3)))
    assert tree.n_nodes == 1 and tree.depth() == 0


def test_tree_partitions_points():
    pts = np.random.default_rng(2).random((1000, 3))
    tree = kdtree_build(pts)
    leaves = tree.leaves()
    assert sorted(np.concatenate(leaves).tolist()) == list(range(1000))
    assert all(len(leaf) <= 16 for leaf in leaves)


def test_query_equal_to_tree_point():
    pts = np.random.default_rng(3).random((300, 3))
    res, evals = kdtree_knn(kdtree_build(pts), pts[123], 3)
    assert res[0] == (0.0, 123) and evals > 0


def test_k_larger_than_tree():
    pts = np.random.default_rng(4).random((10, 2))
    tree_res, _ = kdtree_knn(kdtree_build(pts), [0.5, 0.5], 50)
    brute_res, evals = brute_knn(pts, [0.5, 0.5], 50)
    assert tree_res == brute_res and len(tree_res) == 10 and evals == 10


def test_knn_bad_args():
    tree = kdtree_build(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        kdtree_query(tree, np.zeros((1, 2)), 0)
    with pytest.raises(ValueError):
        kdtree_query(tree, np.zeros((1, 3)), 1)


def test_tree_matches_brute_force_200_points():
    rng = np.random.default_rng(5)
    pts, queries = rng.random((200, 3)), rng.random((50, 3))
    d, i, _ = kdtree_query(kdtree_build(pts), queries, 5)
    bd, bi, _ = brute_query(pts, queries, 5)
    assert np.array_equal(i, bi) and np.array_equal(d, bd)


@settings(max_examples=40, deadline=None)
@given(pts=arrays(np.float64, st.tuples(st.integers(1, 80), st.just(2)),
                  elements=st.integers(0, 4).map(float)),
       k=st.integers(1, 10), q=st.tuples(st.integers(-1, 5), st.integers(-1, 5)))
def test_tree_handles_heavy_ties(pts, k, q):
    res, _ = kdtree_knn(kdtree_build(pts, leaf_size=2), np.array(q, float), k)
    assert res == brute_knn(pts, np.array(q, float), k)[0]


def test_merge_kqueries():
    part = [(0.1, 4), (0.2, 9), (0.5, 1)]
    assert merge_kqueries([part], 2) == part[:2]
    assert merge_kqueries([[(1.0, 7)], [(1.0, 3)]], 2) == [(1.0, 3), (1.0, 7)]


def test_merge_of_disjoint_parts_equals_brute_force():
    rng = np.random.default_rng(6)
    pts, queries = rng.random((400, 3)), rng.random((20, 3))
    splits = np.split(np.arange(400), [90, 200, 310])
    parts = []
    for idx in splits:
        d, local, _ = kdtree_query(kdtree_build(pts[idx]), queries, 5)
        parts.append((d, idx[local]))
    md, mi = merge_kqueries_batch(parts, 5)
    bd, bi, _ = brute_query(pts, queries, 5)
    assert np.array_equal(mi, bi) and np.array_equal(md, bd)
    for r in range(3):
        lists = [list(zip(p[0][r].tolist(), p[1][r].tolist())) for p in parts]
        assert merge_kqueries(lists, 5) == list(zip(bd[r].tolist(), bi[r].tolist()))


def test_one_big_tree_beats_six_small():
    rng = np.random.default_rng(7)
    m = 1000
    pts, queries = rng.random((6 * m, 3)), rng.random((500, 3))
    big = kdtree_query(kdtree_build(pts), queries, 5)[2]
    small = sum(kdtree_query(kdtree_build(pts[j * m:(j + 1) * m]), queries, 5)[2] for j in range(6))
    assert big <= small
