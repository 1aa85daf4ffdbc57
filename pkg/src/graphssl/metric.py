"""Mahalanobis metrics learned from equivalence constraints (KISS).

The KISS estimator compares the covariance of pairwise differences between
same-class samples with the one between different-class samples::

    M = inv(Sigma_S) - inv(Sigma_D)

and projects the result onto the PSD cone so that it defines a valid
squared distance ``(x - y)^T M (x - y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .data import DataSet

DEFAULT_REGULARIZATION = 1e-3


class InsufficientLabelsError(ValueError):
    pass


class SingularCovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPairs:
    similar: list[tuple[int, int]]
    dissimilar: list[tuple[int, int]]


@dataclass(frozen=True, eq=False)
class MetricMatrix:
    M: np.ndarray
    regularization: float = 0.0
    provenance: str = "identity"

    @property
    def m(self) -> int:
        return self.M.shape[0]

    def factor(self) -> np.ndarray:
        """Return ``F`` with ``M = F @ F.T`` (negative eigenvalues dropped)."""
        vals, vecs = np.linalg.eigh(self.M)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))

    def scaled(self, c: float) -> "MetricMatrix":
        return MetricMatrix(c * self.M, self.regularization, self.provenance)


def identity_metric(m: int) -> MetricMatrix:
    return MetricMatrix(np.eye(m), 0.0, "identity")


def enumerate_pairs(dataset: DataSet) -> LabeledPairs:
    """All unordered pairs within the labeled prefix, split by label equality."""
    y = dataset.labeled_labels
    if len(np.unique(y)) < 2:
        raise InsufficientLabelsError("insufficient label diversity")
    similar, dissimilar = [], []
    for i, j in combinations(range(len(y)), 2):
        (similar if y[i] == y[j] else dissimilar).append((i, j))
    if not similar:
        raise InsufficientLabelsError("insufficient similar pairs")
    return LabeledPairs(similar, dissimilar)


def _pair_covariance(X: np.ndarray, pairs) -> np.ndarray:
    idx = np.asarray(pairs)
    diffs = X[:, idx[:, 0]] - X[:, idx[:, 1]]
    return diffs @ diffs.T / len(pairs)


def _shrunk_inverse(cov: np.ndarray, regularization: float, which: str) -> np.ndarray:
    m = cov.shape[0]
    cov = cov + regularization * np.trace(cov) / m * np.eye(m)
    # eigen-solve on the symmetric matrix; an explicit rcond test keeps the
    # failure deterministic instead of relying on LinAlgError
    vals, vecs = np.linalg.eigh(cov)
    top = vals.max()
    if top <= 0 or vals.min() <= top * m * np.finfo(float).eps:
        raise SingularCovarianceError(
            f"{which} covariance singular; raise regularization")
    return (vecs / vals) @ vecs.T


def project_psd(M: np.ndarray) -> np.ndarray:
    M = 0.5 * (M + M.T)
    vals, vecs = np.linalg.eigh(M)
    out = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    return 0.5 * (out + out.T)


def learn_kiss_metric(dataset: DataSet, pairs: LabeledPairs | None = None,
                      regularization: float = DEFAULT_REGULARIZATION) -> MetricMatrix:
    """Fit a KISS metric on the labeled prefix of ``dataset``.

    Parameters
    ----------
    dataset : DataSet
        Samples are the columns of ``dataset.X``.
    pairs : LabeledPairs, optional
        Defaults to ``enumerate_pairs(dataset)``.
    regularization : float
        Each pair covariance is shrunk to ``Sigma + r * tr(Sigma)/m * I``
        before inversion.
    """
    if regularization < 0:
        raise ValueError("regularization must be nonnegative")
    if pairs is None:
        pairs = enumerate_pairs(dataset)
    l = dataset.n_labeled
    for i, j in pairs.similar + pairs.dissimilar:
        if not (0 <= i < l and 0 <= j < l) or i == j:
            raise ValueError(f"invalid pair ({i},{j}) for labeled prefix {l}")
    if not pairs.similar or not pairs.dissimilar:
        raise InsufficientLabelsError("both pair sets must be nonempty")

    X = dataset.X
    inv_s = _shrunk_inverse(_pair_covariance(X, pairs.similar), regularization, "similar")
    inv_d = _shrunk_inverse(_pair_covariance(X, pairs.dissimilar), regularization,
                            "dissimilar")
    return MetricMatrix(project_psd(inv_s - inv_d), regularization, "kiss-learned")


def metric_distance_sq(M: MetricMatrix, x_i, x_j) -> float:
    x_i = np.asarray(x_i, dtype=np.float64)
    x_j = np.asarray(x_j, dtype=np.float64)
    if x_i.shape != (M.m,) or x_j.shape != (M.m,):
        raise ValueError(
            f"dimension mismatch: metric is {M.m}-D, got {x_i.shape} and {x_j.shape}")
    d = x_i - x_j
    val = float(d @ M.M @ d)
    return val if val > 0.0 else 0.0


def save_metric(metric: MetricMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"m={metric.m}\n")
        for row in metric.M:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_metric(path) -> MetricMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("m="):
        raise ValueError(f"{path}: missing 'm=<dim>' header")
    m = int(lines[0][2:])
    M = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:1 + m]])
    if M.shape != (m, m):
        raise ValueError(f"{path}: expected {m}x{m} matrix, got {M.shape}")
    provenance = "identity" if np.array_equal(M, np.eye(m)) else "kiss-learned"
    return MetricMatrix(M, 0.0, provenance)
