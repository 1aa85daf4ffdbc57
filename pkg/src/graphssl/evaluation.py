"""k-means and clustering accuracy (AC) under the best cluster-to-class map."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

DEFAULT_RESTARTS = 10
DEFAULT_KMEANS_ITERS = 100
# largest side of the contingency table still solved by enumeration
EXHAUSTIVE_LIMIT = 8


@dataclass(frozen=True)
class KMeansConfig:
    n_clusters: int | None = None
    restarts: int = DEFAULT_RESTARTS
    max_iters: int = DEFAULT_KMEANS_ITERS
    seed: int = 0


@dataclass(eq=False)
class ClusteringResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    restarts_used: int
    seed: int
    inertia_history: list[float] = field(default_factory=list)


@dataclass(eq=False)
class AccuracyReport:
    ac: float
    mapping: dict
    confusion: np.ndarray
    matched: int


def _plusplus_seeds(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = cdist(points, points[chosen], "sqeuclidean").ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        closest = np.minimum(closest, cdist(points, points[[nxt]], "sqeuclidean").ravel())
    return points[chosen].copy()


def _inertia(points, centroids, labels) -> float:
    diff = points - centroids[labels]
    return float(np.sum(diff * diff))


def _lloyd(points: np.ndarray, centroids: np.ndarray, max_iters: int):
    n, k = points.shape[0], centroids.shape[0]
    labels = None
    history = []
    for _ in range(max_iters):
        d2 = cdist(points, centroids, "sqeuclidean")
        new_labels = np.argmin(d2, axis=1)
        counts = np.bincount(new_labels, minlength=k)
        for c in np.flatnonzero(counts == 0):
            # farthest point from its own centroid, taken from a cluster
            # that can spare it
            own = d2[np.arange(n), new_labels].copy()
            own[counts[new_labels] < 2] = -np.inf
            far = int(np.argmax(own))
            counts[new_labels[far]] -= 1
            new_labels[far] = c
            counts[c] = 1
            d2[far] = np.inf
            d2[far, c] = 0.0
        for c in range(k):
            centroids[c] = points[new_labels == c].mean(axis=0)
        history.append(_inertia(points, centroids, new_labels))
        if labels is not None and np.array_equal(labels, new_labels):
            labels = new_labels
            break
        labels = new_labels
    return labels, centroids, history


def kmeans(points, k: int, restarts: int = DEFAULT_RESTARTS,
           max_iters: int = DEFAULT_KMEANS_ITERS, seed: int = 0) -> ClusteringResult:
    """Lloyd's algorithm with k-means++ seeding, best of ``restarts``.

    Restart ``r`` draws from ``seed + r``; ties in inertia keep the earliest
    restart.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, n={n}]")
    if restarts < 1 or max_iters < 1:
        raise ValueError("restarts and max_iters must be positive")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        labels, centroids, history = _lloyd(points, _plusplus_seeds(points, k, rng), max_iters)
        inertia = _inertia(points, centroids, labels)
        if best is None or inertia < best.inertia:
            best = ClusteringResult(labels, centroids, inertia, restarts, seed, history)
    return best


def _square_confusion(predicted, truth):
    pred_names, pred_codes = np.unique(predicted, return_inverse=True)
    true_names, true_codes = np.unique(truth, return_inverse=True)
    size = max(len(pred_names), len(true_names))
    confusion = np.zeros((size, size), dtype=np.int64)
    np.add.at(confusion, (pred_codes.ravel(), true_codes.ravel()), 1)
    return confusion, pred_names, true_names


def exhaustive_mapping(confusion: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best row->column assignment of a square table by full enumeration."""
    size = confusion.shape[0]
    perms = np.array(list(permutations(range(size))), dtype=np.intp)
    scores = confusion[np.arange(size), perms].sum(axis=1)
    best = perms[int(np.argmax(scores))]
    return np.arange(size), best


def hungarian_mapping(confusion: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return linear_sum_assignment(confusion, maximize=True)


def accuracy(predicted, truth, method: str = "auto") -> AccuracyReport:
    """Clustering accuracy after the best one-to-one cluster->class mapping.

    ``method`` is ``"exhaustive"``, ``"hungarian"`` or ``"auto"`` (enumerate
    up to 8 clusters, Hungarian beyond).
    """
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise ValueError(
            f"length mismatch: predicted {predicted.shape}, truth {truth.shape}")
    if predicted.size == 0:
        raise ValueError("empty assignment")
    confusion, pred_names, true_names = _square_confusion(predicted, truth)
    if method == "auto":
        method = "exhaustive" if confusion.shape[0] <= EXHAUSTIVE_LIMIT else "hungarian"
    if method == "exhaustive":
        rows, cols = exhaustive_mapping(confusion)
    elif method == "hungarian":
        rows, cols = hungarian_mapping(confusion)
    else:
        raise ValueError(f"unknown method {method!r}")
    matched = int(confusion[rows, cols].sum())
    mapping = {pred_names[r].item(): true_names[c].item()
               for r, c in zip(rows, cols)
               if r < len(pred_names) and c < len(true_names)}
    return AccuracyReport(matched / predicted.size, mapping, confusion, matched)
