"""Graph regularized NMF by multiplicative updates.

Minimizes ``||X - U V^T||_F^2 + lambda1 * Tr(V^T L V)`` over ``U >= 0``
(m x k basis) and ``V >= 0`` (n x k coefficients).  The graph decides the
variant: a learned affinity graph gives FGNMF, the label-weight graph gives
LGNMF and the Euclidean kNN graph gives plain GNMF.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evaluation import ClusteringResult, KMeansConfig, kmeans
from .laplacian import GraphLaplacian, smoothness

EPS = 1e-12
DEFAULT_MAX_ITERS = 300
DEFAULT_TOL = 1e-5


@dataclass(eq=False)
class NmfModel:
    U: np.ndarray
    V: np.ndarray
    lambda1: float = 0.0
    objective_trace: list[float] = field(default_factory=list)
    iterations_run: int = 0
    seed: int = 0

    @property
    def k(self) -> int:
        return self.U.shape[1]


def _check_input(X, k: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if np.any(X < 0):
        raise ValueError("NMF requires nonnegative input")
    if not 1 <= k <= min(X.shape):
        raise ValueError(f"k={k} out of range [1, {min(X.shape)}]")
    return X


def init_factors(m: int, n: int, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Entries i.i.d. uniform on (0, 1]; U is drawn before V."""
    rng = np.random.default_rng(seed)
    U = 1.0 - rng.random((m, k))
    V = 1.0 - rng.random((n, k))
    return U, V


def nmf_objective(X, model: NmfModel, lap: GraphLaplacian | None = None) -> float:
    X = np.asarray(X, dtype=np.float64)
    U, V = model.U, model.V
    if U.shape[0] != X.shape[0] or V.shape[0] != X.shape[1] or U.shape[1] != V.shape[1]:
        raise ValueError(
            f"shape mismatch: X {X.shape}, U {U.shape}, V {V.shape}")
    resid = X - U @ V.T
    value = float(np.sum(resid * resid))
    if lap is not None and model.lambda1 != 0.0:
        value += model.lambda1 * smoothness(V, lap)
    return value


def _converged(trace: list[float], tol: float) -> bool:
    prev, cur = trace[-2], trace[-1]
    return (prev - cur) <= tol * max(abs(prev), EPS)


def fit_fgnmf(X, lap: GraphLaplacian, k: int, lambda1: float = 100.0,
              max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
              seed: int = 0, init: tuple[np.ndarray, np.ndarray] | None = None) -> NmfModel:
    """Fit graph regularized NMF.

    Parameters
    ----------
    X : (m, n) array
        Nonnegative data, one sample per column.
    lap : GraphLaplacian
        Laplacian over the ``n`` samples.
    k : int
        Number of basis vectors.
    lambda1 : float
        Weight of the graph smoothness term.
    max_iters, tol :
        Stop after ``max_iters`` sweeps or once the relative objective
        decrease of one sweep falls below ``tol``.
    seed : int
        Seed for the uniform initialization (ignored if ``init`` is given).
    """
    X = _check_input(X, k)
    if lambda1 < 0:
        raise ValueError("lambda1 must be nonnegative")
    m, n = X.shape
    if lap.n != n:
        raise ValueError(f"graph has {lap.n} nodes but X has {n} samples")
    U, V = init_factors(m, n, k, seed) if init is None else (init[0].copy(), init[1].copy())
    W, deg = lap.W, lap.degrees[:, None]

    model = NmfModel(U, V, lambda1, [], 0, seed)
    model.objective_trace.append(nmf_objective(X, model, lap))
    for it in range(max_iters):
        U = U * (X @ V) / np.maximum(U @ (V.T @ V), EPS)
        num = X.T @ U + lambda1 * (W @ V)
        den = V @ (U.T @ U) + lambda1 * (deg * V)
        V = V * num / np.maximum(den, EPS)
        model.U, model.V, model.iterations_run = U, V, it + 1
        model.objective_trace.append(nmf_objective(X, model, lap))
        if _converged(model.objective_trace, tol):
            break
    return model


def fit_nmf(X, k: int, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
            seed: int = 0, init: tuple[np.ndarray, np.ndarray] | None = None) -> NmfModel:
    """Plain Lee-Seung NMF (Frobenius loss), no graph term."""
    X = _check_input(X, k)
    m, n = X.shape
    U, V = init_factors(m, n, k, seed) if init is None else (init[0].copy(), init[1].copy())
    model = NmfModel(U, V, 0.0, [], 0, seed)
    model.objective_trace.append(nmf_objective(X, model))
    for it in range(max_iters):
        U = U * (X @ V) / np.maximum(U @ (V.T @ V), EPS)
        V = V * (X.T @ U) / np.maximum(V @ (U.T @ U), EPS)
        model.U, model.V, model.iterations_run = U, V, it + 1
        model.objective_trace.append(nmf_objective(X, model))
        if _converged(model.objective_trace, tol):
            break
    return model


def predict_clusters_nmf(model: NmfModel, kmeans_cfg: KMeansConfig | None = None) -> ClusteringResult:
    """k-means on the rows of ``V`` (one row per sample)."""
    cfg = kmeans_cfg or KMeansConfig()
    return kmeans(model.V, cfg.n_clusters or model.k, cfg.restarts, cfg.max_iters, cfg.seed)


def save_nmf(model: NmfModel, path) -> None:
    m, n, k = model.U.shape[0], model.V.shape[0], model.k
    with open(path, "w") as fh:
        fh.write(f"m={m},n={n},k={k},lambda1={model.lambda1!r},"
                 f"iterations={model.iterations_run},seed={model.seed}\n")
        for block in (model.U, model.V):
            for row in block:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        for value in model.objective_trace:
            fh.write(f"trace,{float(value)!r}\n")


def load_nmf(path) -> NmfModel:
    lines = Path(path).read_text().splitlines()
    header = dict(kv.split("=", 1) for kv in lines[0].split(","))
    m, n, k = int(header["m"]), int(header["n"]), int(header["k"])
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:1 + m + n]]
    trace = [float(ln.split(",")[1]) for ln in lines[1 + m + n:] if ln.startswith("trace,")]
    block = np.array(rows).reshape(m + n, k)
    return NmfModel(block[:m].copy(), block[m:].copy(), float(header["lambda1"]),
                    trace, int(header["iterations"]), int(header["seed"]))
