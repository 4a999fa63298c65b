from .histogram import HistogramSpec, histogramdd, sum_counts
from .kdtree import (KdTree, brute_knn, brute_query, kdtree_build, kdtree_knn, kdtree_query,
                     merge_kqueries, merge_kqueries_batch)
from .kmeans import PartialSums, kmeans_merge, kmeans_partial, kmeans_recompute
from .smo import SvmModel, smo_train, svm_predict

__all__ = [
    "HistogramSpec", "histogramdd", "sum_counts",
    "KdTree", "kdtree_build", "kdtree_knn", "kdtree_query", "brute_knn", "brute_query",
    "merge_kqueries", "merge_kqueries_batch",
    "PartialSums", "kmeans_partial", "kmeans_merge", "kmeans_recompute",
    "SvmModel", "smo_train", "svm_predict",
]
