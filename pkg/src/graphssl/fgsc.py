"""Graph regularized sparse coding.

Objective over a dictionary ``B`` (m x k) and codes ``S`` (k x n)::

    ||X - B S||_F^2 + lambda2 * Tr(S L S^T) + lambda3 * sum_i ||s_i||_1
    subject to ||b_r||^2 <= c for every atom

Codes are updated by cyclic coordinate descent with exact soft-threshold
steps; the dictionary by projected gradient onto the column-norm balls.
Each phase never increases the objective, so neither does the alternation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .evaluation import ClusteringResult, KMeansConfig, kmeans
from .laplacian import GraphLaplacian, smoothness

DEFAULT_C = 1.0
DEFAULT_INNER_ITERS = 3
DEFAULT_OUTER_ITERS = 100
DEFAULT_TOL = 1e-5
DEFAULT_DICT_ITERS = 50
ZERO_CODE = 1e-12


@dataclass(eq=False)
class SparseCodingModel:
    B: np.ndarray
    S: np.ndarray
    lambda2: float = 0.0
    lambda3: float = 0.0
    c: float = DEFAULT_C
    objective_trace: list[float] = field(default_factory=list)
    seed: int = 0
    iterations_run: int = 0

    @property
    def k(self) -> int:
        return self.B.shape[1]

    def sparsity(self) -> float:
        """Fraction of code entries that are (numerically) exactly zero."""
        return float(np.mean(np.abs(self.S) < ZERO_CODE))


@dataclass(frozen=True)
class ObjectiveTerms:
    reconstruction: float
    smoothness: float
    sparsity: float
    lambda2: float
    lambda3: float

    @property
    def total(self) -> float:
        return (self.reconstruction + self.lambda2 * self.smoothness
                + self.lambda3 * self.sparsity)


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def gsc_objective_terms(X, B, S, lap: GraphLaplacian | None, lambda2: float,
                        lambda3: float) -> ObjectiveTerms:
    X = np.asarray(X, dtype=np.float64)
    if B.shape[0] != X.shape[0] or S.shape[1] != X.shape[1] or B.shape[1] != S.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, B {B.shape}, S {S.shape}")
    resid = X - B @ S
    smooth = smoothness(S.T, lap) if lap is not None else 0.0
    return ObjectiveTerms(float(np.sum(resid * resid)), smooth,
                          float(np.abs(S).sum()), lambda2, lambda3)


def gsc_objective(X, model: SparseCodingModel, lap: GraphLaplacian | None) -> float:
    return gsc_objective_terms(X, model.B, model.S, lap, model.lambda2,
                               model.lambda3).total


def _laplacian_columns(lap: GraphLaplacian | None, n: int):
    if lap is None:
        return None
    if lap.n != n:
        raise ValueError(f"graph has {lap.n} nodes but X has {n} samples")
    return lap.L.tocsc() if sp.issparse(lap.L) else np.asarray(lap.L)


def update_codes(X, B, S, lap: GraphLaplacian | None, lambda2: float, lambda3: float,
                 inner_iters: int = DEFAULT_INNER_ITERS) -> np.ndarray:
    """Cyclic coordinate descent on the codes, samples outer, atoms inner.

    For coordinate ``(r, j)`` the objective restricted to ``a = S[r, j]`` is
    ``alpha a^2 - 2 beta a + lambda3 |a|`` with

        alpha = ||b_r||^2 + lambda2 L_jj
        beta  = b_r^T (x_j - B s_j) + ||b_r||^2 S_rj
                - lambda2 sum_{j' != j} L_jj' S_rj'

    whose minimizer is ``soft_threshold(beta, lambda3 / 2) / alpha``.
    """
    X = np.asarray(X, dtype=np.float64)
    S = np.array(S, dtype=np.float64, copy=True)
    k, n = S.shape
    L = _laplacian_columns(lap, n) if lambda2 != 0.0 else None
    G = B.T @ B
    BtX = B.T @ X
    gdiag = np.diag(G).copy()
    half = 0.5 * lambda3
    for _ in range(inner_iters):
        for j in range(n):
            s = S[:, j]
            # grad holds b_r^T (x_j - B s_j) for every atom r
            grad = BtX[:, j] - G @ s
            if L is not None:
                if sp.issparse(L):
                    lcol = L[:, j].toarray().ravel()
                else:
                    lcol = L[:, j]
                ljj = float(lcol[j])
                # coupling[r] = sum_{j'} S[r, j'] L[j', j]; only S[r, j] moves below
                coupling = S @ lcol
            for r in range(k):
                old = s[r]
                alpha = gdiag[r]
                beta = grad[r] + gdiag[r] * old
                if L is not None:
                    alpha += lambda2 * ljj
                    beta -= lambda2 * (coupling[r] - ljj * old)
                if alpha <= 0.0:
                    continue
                z = abs(beta) - half
                new = (z if beta > 0 else -z) / alpha if z > 0.0 else 0.0
                delta = new - old
                if delta != 0.0:
                    s[r] = new
                    grad -= delta * G[:, r]
                    if L is not None:
                        coupling[r] += delta * ljj
            S[:, j] = s
    return S


def update_dictionary(X, S, B, c: float = DEFAULT_C, iters: int = DEFAULT_DICT_ITERS,
                      tol: float = 1e-12) -> np.ndarray:
    """Projected gradient on ``||X - B S||^2`` with ``||b_r||^2 <= c``.

    The step is ``1 / Lip`` with ``Lip = 2 ||S S^T||_2``, which makes every
    iteration a descent step.
    """
    X = np.asarray(X, dtype=np.float64)
    B = np.array(B, dtype=np.float64, copy=True)
    if not np.any(S):
        warnings.warn("all-zero codes: dictionary left unchanged", RuntimeWarning,
                      stacklevel=2)
        return B
    SSt = S @ S.T
    XSt = X @ S.T
    lip = 2.0 * np.linalg.norm(SSt, 2)
    if lip <= 0:
        return B
    radius = np.sqrt(c)
    for _ in range(iters):
        grad = 2.0 * (B @ SSt - XSt)
        B_new = _project_columns(B - grad / lip, radius)
        step = np.max(np.abs(B_new - B))
        B = B_new
        if step <= tol * max(1.0, np.max(np.abs(B))):
            break
    return B


def _project_columns(B: np.ndarray, radius: float) -> np.ndarray:
    if np.isinf(radius):
        return B
    norms = np.linalg.norm(B, axis=0)
    scale = np.where(norms > radius, radius / np.maximum(norms, 1e-300), 1.0)
    return B * scale


def init_dictionary(X: np.ndarray, k: int, c: float, seed: int) -> np.ndarray:
    """``k`` distinct random nonzero data columns scaled to norm ``sqrt(c)``."""
    rng = np.random.default_rng(seed)
    norms = np.linalg.norm(X, axis=0)
    candidates = np.flatnonzero(norms > 0)
    if candidates.size < k:
        raise ValueError(f"need {k} nonzero samples to seed the dictionary")
    pick = rng.choice(candidates, size=k, replace=False)
    target = 1.0 if np.isinf(c) else np.sqrt(c)
    return X[:, pick] / norms[pick] * target


def fit_fgsc(X, lap: GraphLaplacian | None, k: int, lambda2: float = 1.0,
             lambda3: float = 0.1, c: float = DEFAULT_C,
             outer_iters: int = DEFAULT_OUTER_ITERS, tol: float = DEFAULT_TOL,
             seed: int = 0, inner_iters: int = DEFAULT_INNER_ITERS,
             dict_iters: int = DEFAULT_DICT_ITERS, callback=None) -> SparseCodingModel:
    """Alternate code and dictionary updates from a data-seeded dictionary.

    ``callback(model)``, if given, runs after every dictionary update.
    """
    X = np.asarray(X, dtype=np.float64)
    if k < 1:
        raise ValueError("k must be positive")
    if not c > 0:
        raise ValueError("c must be positive")
    if lambda2 < 0 or lambda3 < 0:
        raise ValueError("lambda2 and lambda3 must be nonnegative")
    n = X.shape[1]
    if lap is not None and lap.n != n:
        raise ValueError(f"graph has {lap.n} nodes but X has {n} samples")
    B = init_dictionary(X, k, c, seed)
    S = np.zeros((k, n))
    model = SparseCodingModel(B, S, lambda2, lambda3, c, [], seed, 0)
    model.objective_trace.append(gsc_objective(X, model, lap))
    for it in range(outer_iters):
        model.S = update_codes(X, model.B, model.S, lap, lambda2, lambda3, inner_iters)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            model.B = update_dictionary(X, model.S, model.B, c, dict_iters)
        model.iterations_run = it + 1
        if callback is not None:
            callback(model)
        model.objective_trace.append(gsc_objective(X, model, lap))
        prev, cur = model.objective_trace[-2:]
        if prev - cur <= tol * max(abs(prev), 1e-300):
            break
    return model


def predict_clusters_gsc(model: SparseCodingModel,
                         kmeans_cfg: KMeansConfig | None = None) -> ClusteringResult:
    """k-means on the code columns (one code vector per sample)."""
    cfg = kmeans_cfg or KMeansConfig()
    return kmeans(model.S.T, cfg.n_clusters or model.k, cfg.restarts, cfg.max_iters, cfg.seed)


def save_sparse_coding(model: SparseCodingModel, path) -> None:
    m, k = model.B.shape
    n = model.S.shape[1]
    with open(path, "w") as fh:
        fh.write(f"m={m},n={n},k={k},lambda2={model.lambda2!r},lambda3={model.lambda3!r},"
                 f"c={model.c!r},iterations={model.iterations_run},seed={model.seed}\n")
        for row in model.B:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
        for r, j in zip(*np.nonzero(model.S)):
            fh.write(f"s,{r},{j},{float(model.S[r, j])!r}\n")
        for value in model.objective_trace:
            fh.write(f"trace,{float(value)!r}\n")


def load_sparse_coding(path) -> SparseCodingModel:
    lines = Path(path).read_text().splitlines()
    header = dict(kv.split("=", 1) for kv in lines[0].split(","))
    m, n, k = int(header["m"]), int(header["n"]), int(header["k"])
    B = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:1 + m]]).reshape(m, k)
    S = np.zeros((k, n))
    trace = []
    for ln in lines[1 + m:]:
        parts = ln.split(",")
        if parts[0] == "s":
            S[int(parts[1]), int(parts[2])] = float(parts[3])
        elif parts[0] == "trace":
            trace.append(float(parts[1]))
    return SparseCodingModel(B, S, float(header["lambda2"]), float(header["lambda3"]),
                             float(header["c"]), trace, int(header["seed"]),
                             int(header["iterations"]))
