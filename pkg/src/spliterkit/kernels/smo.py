"""Linear-kernel SVM trained with simplified SMO.

The second multiplier of each pair is drawn from a SplitMix64 stream, so
training is deterministic for a given ``seed``. For the linear kernel the
weight vector is kept explicitly, which makes each decision value O(dims).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import Rng64

SUPPORT_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_points: np.ndarray
    support_labels: np.ndarray
    alphas: np.ndarray
    bias: float
    support_global_indexes: np.ndarray

    def __post_init__(self):
        n = len(self.support_points)
        if not (len(self.support_labels) == len(self.alphas) == len(self.support_global_indexes) == n):
            raise ValueError("support fields must have equal length")

    @property
    def n_support(self):
        return len(self.alphas)

    @property
    def nbytes(self):
        return int(self.support_points.nbytes + self.support_labels.nbytes
                   + self.alphas.nbytes + self.support_global_indexes.nbytes + 8)

    def decision_function(self, points):
        points = np.asarray(points, dtype=np.float64)
        coef = self.alphas * self.support_labels
        return (points @ self.support_points.T) @ coef + self.bias


def smo_train(points, labels, C=1.0, tol=1e-3, max_passes=10, *,
              global_indexes=None, seed=0, max_sweeps=10_000) -> SvmModel:
    """Fit a soft-margin linear SVM.

    Stops after ``max_passes`` consecutive sweeps without a multiplier
    update (or ``max_sweeps`` sweeps overall).
    """
    X = np.ascontiguousarray(points, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    n = len(X)
    if X.ndim != 2 or len(y) != n:
        raise ValueError("points must be (n, d) with one label per point")
    if not np.all((y == 1.0) | (y == -1.0)):
        raise ValueError("labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("smo_train needs at least one point of each class")
    gidx = np.arange(n) if global_indexes is None else np.asarray(global_indexes, dtype=np.int64)

    rng = Rng64(seed)
    diag = np.einsum("ij,ij->i", X, X)
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    b = 0.0
    passes = sweeps = 0
    while passes < max_passes and sweeps < max_sweeps:
        changed = 0
        for i in range(n):
            yi = y[i]
            Ei = X[i] @ w + b - yi
            ai = alpha[i]
            if not ((yi * Ei < -tol and ai < C) or (yi * Ei > tol and ai > 0)):
                continue
            j = rng.randbelow(n - 1)
            if j >= i:
                j += 1
            yj = y[j]
            aj = alpha[j]
            Ej = X[j] @ w + b - yj
            if yi != yj:
                lo, hi = max(0.0, aj - ai), min(C, C + aj - ai)
            else:
                lo, hi = max(0.0, ai + aj - C), min(C, ai + aj)
            if lo == hi:
                continue
            kij = X[i] @ X[j]
            eta = 2.0 * kij - diag[i] - diag[j]
            if eta >= 0:
                continue
            aj_new = min(hi, max(lo, aj - yj * (Ei - Ej) / eta))
            if abs(aj_new - aj) < 1e-5:
                continue
            ai_new = ai + yi * yj * (aj - aj_new)
            di, dj = ai_new - ai, aj_new - aj
            b1 = b - Ei - yi * di * diag[i] - yj * dj * kij
            b2 = b - Ej - yi * di * kij - yj * dj * diag[j]
            if 0 < ai_new < C:
                b = b1
            elif 0 < aj_new < C:
                b = b2
            else:
                b = (b1 + b2) / 2.0
            w += (yi * di) * X[i] + (yj * dj) * X[j]
            alpha[i], alpha[j] = ai_new, aj_new
            changed += 1
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0

    sv = np.flatnonzero(alpha > SUPPORT_EPS)
    return SvmModel(X[sv].copy(), y[sv].copy(), alpha[sv].copy(), float(b), gidx[sv].copy())


def svm_predict(model: SvmModel, points):
    """Labels in {-1, +1}; a zero decision value maps to +1."""
    return np.where(model.decision_function(points) >= 0, 1.0, -1.0)
