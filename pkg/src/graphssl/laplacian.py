"""Unnormalized graph Laplacian ``L = D - W`` and the smoothness penalty."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import AffinityGraph


class AsymmetricAffinityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GraphLaplacian:
    L: np.ndarray | sp.csr_matrix
    degrees: np.ndarray
    W: np.ndarray | sp.csr_matrix

    @property
    def n(self) -> int:
        return self.degrees.shape[0]

    @property
    def D(self):
        if sp.issparse(self.W):
            return sp.diags(self.degrees, format="csr")
        return np.diag(self.degrees)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.L)


def _laplacian_from_weights(W) -> GraphLaplacian:
    if sp.issparse(W):
        W = sp.csr_matrix(W, dtype=np.float64)
        asym = abs(W - W.T).max() if W.nnz else 0.0
        scale = abs(W).max() if W.nnz else 0.0
        degrees = np.asarray(W.sum(axis=0)).ravel()
        L = (sp.diags(degrees) - W).tocsr()
    else:
        W = np.asarray(W, dtype=np.float64)
        asym = np.abs(W - W.T).max() if W.size else 0.0
        scale = np.abs(W).max() if W.size else 0.0
        degrees = W.sum(axis=0)
        L = np.diag(degrees) - W
    if asym > 1e-12 * max(scale, 1.0):
        raise AsymmetricAffinityError("affinity not symmetric")
    return GraphLaplacian(L, degrees, W)


def build_laplacian(graph: AffinityGraph | np.ndarray) -> GraphLaplacian:
    """Laplacian of an affinity graph (or a raw symmetric weight matrix)."""
    W = graph.W if isinstance(graph, AffinityGraph) else graph
    return _laplacian_from_weights(W)


def smoothness(V: np.ndarray, lap: GraphLaplacian) -> float:
    """``Tr(V^T L V)`` for an ``n x k`` representation ``V``."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] != lap.n:
        raise ValueError(f"V has {V.shape[0]} rows, graph has {lap.n} nodes")
    val = float(np.sum(V * (lap.L @ V)))
    return max(val, 0.0)

