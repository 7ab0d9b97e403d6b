"""Vectorized decision rules shared by the classifier API and the harness.

Everything here works on precomputed dissimilarity matrices:

* ``H_train`` -- (n, n) symmetric train-vs-train dissimilarities, zero diagonal
* ``H_test``  -- (m, n) test-vs-train dissimilarities

Ties in argmin decisions go to the smallest class index; nearest-neighbor
distance ties go to the smallest training-point index.
"""

from __future__ import annotations

import numpy as np


def class_indicator(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """One-hot (n, J) indicator of class membership."""
    M = np.zeros((labels.shape[0], n_classes))
    M[np.arange(labels.shape[0]), labels] = 1.0
    return M


def scaled_sqdist(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """d^-1 ||a - b||^2 between rows, via the gram expansion (clipped at 0)."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return sq / A.shape[1]


def within_class_means(H_train: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Mean dissimilarity over ordered distinct pairs inside each class."""
    M = class_indicator(labels, n_classes)
    counts = M.sum(axis=0)
    totals = np.einsum("ij,ik,kj->j", M, H_train, M)
    denom = counts * (counts - 1)
    if np.any(denom == 0):
        bad = int(np.argmax(denom == 0))
        raise ValueError(f"class {bad} needs at least 2 training points for the scale adjustment")
    return totals / denom


def avg_family_scores(
    H_test: np.ndarray, H_train: np.ndarray | None, labels: np.ndarray, n_classes: int, adjust: bool
) -> np.ndarray:
    """(m, J) discriminant matrix: class means of H_test, minus half the
    within-class mean when ``adjust`` is set."""
    M = class_indicator(labels, n_classes)
    counts = M.sum(axis=0)
    scores = (H_test @ M) / counts
    if adjust:
        scores = scores - within_class_means(H_train, labels, n_classes) / 2.0
    return scores


def madd_from_rows(H_test: np.ndarray, H_train: np.ndarray) -> np.ndarray:
    """Mean absolute difference of dissimilarity profiles, (m, n).

    For test row z and training point x_m the sum runs over all training
    points except x_m itself; the excluded term equals H_test[z, m] because
    the train matrix has a zero diagonal.
    """
    n = H_train.shape[0]
    if n < 2:
        raise ValueError("mean-absolute-difference dissimilarity needs at least 2 training points")
    L1 = np.abs(H_test[:, None, :] - H_train[None, :, :]).sum(axis=2)
    return (L1 - H_test) / (n - 1)


def min_per_class(values: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Column-wise minimum of (m, n) values inside each class, (m, J)."""
    out = np.empty((values.shape[0], n_classes))
    for j in range(n_classes):
        out[:, j] = values[:, labels == j].min(axis=1)
    return out


def argmin_classes(scores: np.ndarray) -> np.ndarray:
    """Row argmin; numpy returns the first minimum, i.e. the smallest class."""
    return scores.argmin(axis=1)


def _knn_vote_row(row: np.ndarray, labels: np.ndarray, n_classes: int, k: int) -> int:
    """Majority vote among the k globally smallest dissimilarities.

    Distance ties break toward smaller training index (stable sort); vote
    ties break by smaller aggregate dissimilarity, then smaller class index.
    """
    order = np.argsort(row, kind="stable")[:k]
    votes = np.bincount(labels[order], minlength=n_classes)
    top = votes.max()
    tied = np.flatnonzero(votes == top)
    if tied.size == 1:
        return int(tied[0])
    sums = np.array([row[order[labels[order] == j]].sum() for j in tied])
    best = sums.min()
    return int(tied[np.flatnonzero(sums == best)[0]])


def nn_family_predict(values: np.ndarray, labels: np.ndarray, n_classes: int, k: int = 1) -> np.ndarray:
    """Nearest-neighbor decision from an (m, n) dissimilarity-to-train matrix."""
    if k == 1:
        return argmin_classes(min_per_class(values, labels, n_classes))
    return np.array([_knn_vote_row(row, labels, n_classes, k) for row in values], dtype=np.intp)


def loocv_avg_family(H_train: np.ndarray, labels: np.ndarray, n_classes: int) -> float:
    """Leave-one-out error of the scale-adjusted average-distance rule."""
    n = H_train.shape[0]
    M = class_indicator(labels, n_classes)
    counts = M.sum(axis=0)
    if counts.min() < 3:
        bad = int(np.argmin(counts))
        raise ValueError(
            f"class {bad} has {int(counts[bad])} training points; leave-one-out for the "
            "average-distance family needs at least 3 per class"
        )
    S = H_train @ M
    totals = (S * M).sum(axis=0)
    own = M.astype(bool)

    means = S / counts
    d_full = totals / (counts * (counts - 1))
    scores = means - d_full / 2.0
    # rows belonging to class j see the class with themselves removed
    nj = counts[labels]
    means_own = S[own] / (nj - 1)
    d_own = (totals[labels] - 2.0 * S[own]) / ((nj - 1) * (nj - 2))
    scores[own] = means_own - d_own / 2.0
    preds = argmin_classes(scores)
    return float(np.mean(preds != labels))


def loocv_nn_madd(H_train: np.ndarray, labels: np.ndarray, n_classes: int) -> float:
    """Leave-one-out error of the 1-NN rule on mean-absolute-difference scores."""
    n = H_train.shape[0]
    counts = np.bincount(labels, minlength=n_classes)
    if counts.min() < 2:
        bad = int(np.argmin(counts))
        raise ValueError(
            f"class {bad} has {int(counts[bad])} training points; leave-one-out for the "
            "nearest-neighbor family needs at least 2 per class"
        )
    L1 = np.abs(H_train[:, None, :] - H_train[None, :, :]).sum(axis=2)
    psi = (L1 - 2.0 * H_train) / (n - 2)
    np.fill_diagonal(psi, np.inf)
    scores = min_per_class(psi, labels, n_classes)
    preds = argmin_classes(scores)
    return float(np.mean(preds != labels))
