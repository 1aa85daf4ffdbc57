"""Affinity graph construction.

The learned graph is built in four stages: a metric adjacency ``A`` holding
squared Mahalanobis distances between all sample pairs, a symmetric kNN
pattern ``P``, a bandwidth ``sigma`` and Gaussian edge weights
``W = P * exp(-A / (2 sigma^2))``.  Two baseline graphs are also provided:
the label-weight graph (same-class labeled pairs only) and the same kNN
Gaussian pipeline under the Euclidean metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import pdist, squareform

from .data import DataSet
from .metric import (DEFAULT_REGULARIZATION, MetricMatrix, identity_metric,
                     learn_kiss_metric)

DEFAULT_KNN = 5
# graphs above this many nodes keep W and P in CSR form
DENSE_LIMIT = 4096

KINDS = ("learned", "label-weight", "unsupervised-gaussian")


class DegenerateDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AffinityGraph:
    W: np.ndarray | sp.csr_matrix
    P: np.ndarray | sp.csr_matrix
    A: np.ndarray | None
    sigma: float
    kind: str
    k: int = 0
    metric: MetricMatrix | None = None

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def dense_weights(self) -> np.ndarray:
        return self.W.toarray() if sp.issparse(self.W) else np.asarray(self.W)

    def edge_count(self) -> int:
        """Number of undirected edges."""
        P = self.P
        nnz = P.nnz if sp.issparse(P) else int(np.count_nonzero(P))
        return nnz // 2


def _maybe_sparse(M: np.ndarray):
    return sp.csr_matrix(M) if M.shape[0] > DENSE_LIMIT else M


def full_adjacency(dataset: DataSet, M: MetricMatrix) -> np.ndarray:
    """Squared metric distance between every pair of samples."""
    if dataset.n < 2:
        raise ValueError("full adjacency needs at least 2 samples")
    if M.m != dataset.m:
        raise ValueError(f"metric is {M.m}-D but samples are {dataset.m}-D")
    if np.array_equal(M.M, np.eye(M.m)):
        Y = dataset.X.T
    else:
        Y = dataset.X.T @ M.factor()
    # pdist evaluates each pair once: exact symmetry and zero diagonal
    return squareform(pdist(Y, "sqeuclidean"))


def knn_sparsify(A: np.ndarray, k: int, symmetrize: bool = True) -> np.ndarray:
    """Binary kNN pattern; ties go to the smaller column index."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if k >= n:
        raise ValueError(f"k exceeds available neighbors (k={k}, n={n})")
    masked = A.copy()
    np.fill_diagonal(masked, np.inf)
    nearest = np.argsort(masked, axis=1, kind="stable")[:, :k]
    P = np.zeros((n, n), dtype=np.float64)
    np.put_along_axis(P, nearest, 1.0, axis=1)
    if symmetrize:
        P = np.maximum(P, P.T)
    np.fill_diagonal(P, 0.0)
    return P


def default_bandwidth(A: np.ndarray) -> float:
    """``sigma = sum_ij A_ij^2 / n^2``, taken literally."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    sigma = float(np.sum(A * A) / (n * n))
    if not sigma > 0.0:
        raise DegenerateDataError("degenerate dataset: zero bandwidth")
    return sigma


def gaussian_reweight(P, A, sigma: float, kind: str = "learned", k: int = 0,
                      metric: MetricMatrix | None = None) -> AffinityGraph:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    P = np.asarray(P, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if P.shape != A.shape:
        raise ValueError(f"pattern {P.shape} and adjacency {A.shape} differ")
    W = np.where(P > 0, np.exp(-A / (2.0 * sigma * sigma)), 0.0)
    # far edges would otherwise underflow and silently vanish from P
    W = np.where(P > 0, np.maximum(W, np.finfo(float).tiny), 0.0)
    return AffinityGraph(_maybe_sparse(W), _maybe_sparse(P), A, float(sigma),
                         kind, k, metric)


def _metric_graph(dataset: DataSet, metric: MetricMatrix, k: int, kind: str,
                  sigma: float | None) -> AffinityGraph:
    A = full_adjacency(dataset, metric)
    P = knn_sparsify(A, k)
    if sigma is None:
        sigma = default_bandwidth(A)
    return gaussian_reweight(P, A, sigma, kind, k, metric)


def build_learned_graph(dataset: DataSet, k: int = DEFAULT_KNN,
                        regularization: float = DEFAULT_REGULARIZATION,
                        sigma: float | None = None) -> AffinityGraph:
    """KISS metric -> adjacency -> kNN -> bandwidth -> Gaussian weights.

    ``sigma`` overrides the default bandwidth rule when given.
    """
    metric = learn_kiss_metric(dataset, regularization=regularization)
    return _metric_graph(dataset, metric, k, "learned", sigma)


def unsupervised_gaussian_graph(dataset: DataSet, k: int = DEFAULT_KNN,
                                sigma: float | None = None) -> AffinityGraph:
    return _metric_graph(dataset, identity_metric(dataset.m), k,
                         "unsupervised-gaussian", sigma)


def label_weight_graph(dataset: DataSet) -> AffinityGraph:
    """``W_ij = 1`` for distinct labeled samples sharing a class, else 0."""
    l = dataset.n_labeled
    if dataset.labels is None or l < 2:
        raise ValueError("label weight graph needs at least 2 labeled samples")
    y = dataset.labeled_labels
    W = np.zeros((dataset.n, dataset.n))
    W[:l, :l] = y[:, None] == y[None, :]
    np.fill_diagonal(W, 0.0)
    return AffinityGraph(_maybe_sparse(W), _maybe_sparse(W.copy()), None, 1.0,
                         "label-weight", 0)


def cross_class_fraction(graph: AffinityGraph, labels) -> float:
    """Fraction of undirected edges joining samples of different classes."""
    labels = np.asarray(labels)
    P = graph.P.tocoo() if sp.issparse(graph.P) else sp.coo_matrix(graph.P)
    upper = P.row < P.col
    rows, cols = P.row[upper], P.col[upper]
    if rows.size == 0:
        return 0.0
    return float(np.mean(labels[rows] != labels[cols]))


def save_graph(graph: AffinityGraph, path) -> None:
    """Header line, then ``i,j,w`` for each nonzero upper-triangle weight."""
    W = graph.W.tocoo() if sp.issparse(graph.W) else sp.coo_matrix(graph.W)
    order = np.lexsort((W.col, W.row))
    with open(path, "w") as fh:
        fh.write(f"n={graph.n},k={graph.k},sigma={graph.sigma!r},kind={graph.kind}\n")
        for idx in order:
            i, j, w = int(W.row[idx]), int(W.col[idx]), float(W.data[idx])
            if i < j and w != 0.0:
                fh.write(f"{i},{j},{w!r}\n")


def load_graph(path) -> AffinityGraph:
    with open(path) as fh:
        header = dict(kv.split("=", 1) for kv in fh.readline().strip().split(","))
        n = int(header["n"])
        rows, cols, vals = [], [], []
        for line in fh:
            if not line.strip():
                continue
            i, j, w = line.split(",")
            rows.append(int(i))
            cols.append(int(j))
            vals.append(float(w))
    if header["kind"] not in KINDS:
        raise ValueError(f"unknown graph kind {header['kind']!r}")
    W = np.zeros((n, n))
    W[rows, cols] = vals
    W[cols, rows] = vals
    P = (W != 0).astype(np.float64)
    return AffinityGraph(_maybe_sparse(W), _maybe_sparse(P), None,
                         float(header["sigma"]), header["kind"], int(header["k"]))
