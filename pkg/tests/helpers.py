"""Fixtures and brute-force oracles shared by the test modules.

The oracles here deliberately avoid the package's own code paths.
"""

from itertools import permutations

import numpy as np
import scipy.sparse as sp

from graphssl.data import DataSet


def nuisance_blobs(seed=0, n_per_class=40, m=10, n_classes=3, mean_scale=1.0,
                   noise=0.7, nuisance_rank=2, nuisance_scale=3.0):
    """Overlapping Gaussian blobs sharing a low-rank within-class nuisance.

    Every class gets isotropic noise plus large variation along a common
    random ``nuisance_rank``-dimensional subspace (think illumination in face
    images).  Values are shifted to be nonnegative.
    """
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(n_classes, m)) * mean_scale
    basis = np.linalg.qr(rng.normal(size=(m, nuisance_rank)))[0]
    blocks, labels = [], []
    for c in range(n_classes):
        pts = (means[c] + rng.normal(size=(n_per_class, m)) * noise
               + (rng.normal(size=(n_per_class, nuisance_rank)) * nuisance_scale) @ basis.T)
        blocks.append(pts)
        labels += [f"c{c}"] * n_per_class
    X = np.vstack(blocks).T
    X = X - X.min()
    return DataSet(X, np.array(labels), len(labels), "nuisance-blobs")


def separated_blobs(seed=0, n_per_class=10, m=4, n_classes=3, gap=20.0, noise=0.1):
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    for c in range(n_classes):
        center = np.full(m, 1.0)
        center[c % m] += gap
        blocks.append(center + rng.normal(size=(n_per_class, m)) * noise)
        labels += [c] * n_per_class
    return DataSet(np.abs(np.vstack(blocks).T), np.array(labels), len(labels), "separated")


def brute_smoothness(V, W):
    """0.5 * sum_ij ||v_i - v_j||^2 W_ij by explicit double loop."""
    V = np.asarray(V, dtype=float)
    W = W.toarray() if sp.issparse(W) else np.asarray(W)
    n = V.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            d = V[i] - V[j]
            total += float(d @ d) * W[i, j]
    return 0.5 * total


def brute_sqdist_matrix(X, M=None):
    """Pairwise (x_i - x_j)^T M (x_i - x_j) over columns by double loop."""
    m, n = X.shape
    M = np.eye(m) if M is None else M
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            d = X[:, i] - X[:, j]
            A[i, j] = d @ M @ d
    return A


def best_permutation_accuracy(predicted, truth):
    """Best AC over every bijection between cluster ids and class ids."""
    predicted = list(predicted)
    truth = list(truth)
    clusters = sorted(set(predicted), key=str)
    classes = sorted(set(truth), key=str)
    size = max(len(clusters), len(classes))
    clusters += [object() for _ in range(size - len(clusters))]
    best = 0
    for perm in permutations(classes + [None] * (size - len(classes))):
        mapping = dict(zip(clusters, perm))
        hits = sum(mapping[p] == t for p, t in zip(predicted, truth))
        best = max(best, hits)
    return best / len(truth)


def assert_valid_laplacian(lap):
    L = lap.L.toarray() if sp.issparse(lap.L) else np.asarray(lap.L)
    W = lap.W.toarray() if sp.issparse(lap.W) else np.asarray(lap.W)
    np.testing.assert_array_equal(L, L.T)
    max_degree = max(float(lap.degrees.max()), 0.0)
    assert np.all(np.abs(L.sum(axis=1)) <= 1e-10 * max_degree + 1e-300)
    eig = np.linalg.eigvalsh(L)
    assert eig.min() >= -1e-8 * max(eig.max(), 0.0) - 1e-300
    np.testing.assert_array_equal(np.diag(lap.degrees) - W, L)
