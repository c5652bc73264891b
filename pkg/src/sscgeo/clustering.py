"""The SSC pipeline: sparse self-expression, affinity graph, spectral clustering.

Also the classical ``W = V V^T`` affinity built from the rank-r SVD of the
data, used as a baseline.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import Infeasible, RankTooLarge, SSCError
from .metrics import (MetricsReport, clustering_error, feature_detection_error,
                      num_subspaces_error, smallest_nonzero_eig)
from .solver import DEFAULT_TOLERANCES, L1Problem, SolverTolerances, solve_l1

__all__ = [
    "CoefficientMatrix",
    "SpectralDecomposition",
    "ClusterLabels",
    "SSCResult",
    "normalize_columns",
    "build_coefficient_matrix",
    "build_affinity",
    "normalized_laplacian",
    "estimate_num_subspaces",
    "kmeans",
    "spectral_cluster",
    "ssc_pipeline",
    "classical_affinity",
]

log = logging.getLogger(__name__)

OK = "OK"
INFEASIBLE = "INFEASIBLE"


@dataclass
class CoefficientMatrix:
    Z: np.ndarray
    optvals: np.ndarray
    status: list


@dataclass
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]
    isolated_count: int
    laplacian: np.ndarray


@dataclass
class ClusterLabels:
    labels: np.ndarray
    L_hat: int


@dataclass
class SSCResult:
    coefficients: CoefficientMatrix
    W: np.ndarray
    spectrum: SpectralDecomposition
    labels: np.ndarray
    L_hat: int
    metrics: Optional[MetricsReport] = None
    extra: dict = field(default_factory=dict)

    @property
    def Z(self) -> np.ndarray:
        return self.coefficients.Z


def normalize_columns(X, warn_tol: float = 1e-6) -> np.ndarray:
    """Scale columns to unit norm; zero columns are rejected."""
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        raise ValueError("data matrix has a zero column")
    if np.any(np.abs(norms - 1.0) > warn_tol):
        log.warning("normalizing %d columns whose norm deviates from 1",
                    int(np.sum(np.abs(norms - 1.0) > warn_tol)))
    return X / norms


def _solve_column(X, i, tols):
    try:
        sol = solve_l1(L1Problem(X[:, i], X, excluded_index=i), tols)
    except Infeasible:
        return None
    return sol


def build_coefficient_matrix(X, tols: SolverTolerances = DEFAULT_TOLERANCES,
                             threads: int = 1) -> CoefficientMatrix:
    """Column i is the l1-minimal expression of x_i by the other columns.

    Inexpressible columns get a zero coefficient vector and optimal value ``inf``.
    """
    X = normalize_columns(X)
    N = X.shape[1]
    if N < 2:
        raise ValueError("need at least two points")
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            sols = list(pool.map(lambda i: _solve_column(X, i, tols), range(N)))
    else:
        sols = [_solve_column(X, i, tols) for i in range(N)]
    Z = np.zeros((N, N))
    optvals = np.full(N, np.inf)
    status = []
    for i, sol in enumerate(sols):
        if sol is None:
            status.append(INFEASIBLE)
            continue
        Z[:, i] = sol.z
        Z[i, i] = 0.0
        optvals[i] = sol.optval
        status.append(OK)
    return CoefficientMatrix(Z=Z, optvals=optvals, status=status)


def build_affinity(Z) -> np.ndarray:
    """Symmetric affinity ``|Z| + |Z|^T``."""
    A = np.abs(np.asarray(getattr(Z, "Z", Z), dtype=float))
    W = A + A.T
    np.fill_diagonal(W, 0.0)
    return W


def normalized_laplacian(W) -> SpectralDecomposition:
    """Eigen-decomposition of ``I - D^{-1/2} W D^{-1/2}``.

    Isolated vertices keep a unit diagonal entry (eigenvalue 1).
    """
    W = np.asarray(W, dtype=float)
    deg = W.sum(axis=0)
    isolated = deg <= 0
    dinv = np.zeros_like(deg)
    dinv[~isolated] = 1.0 / np.sqrt(deg[~isolated])
    L = np.eye(W.shape[0]) - dinv[:, None] * W * dinv[None, :]
    L = 0.5 * (L + L.T)
    ev, vec = np.linalg.eigh(L)
    ev = np.clip(ev, 0.0, 2.0)
    return SpectralDecomposition(eigenvalues=ev[::-1].copy(), eigenvectors=vec[:, ::-1].copy(),
                                 isolated_count=int(isolated.sum()), laplacian=L)


def estimate_num_subspaces(spec, skip_final_gap: bool = False) -> int:
    """``N - argmax_i (sigma_i - sigma_{i+1})`` on descending eigenvalues (1-based i).

    Ties go to the largest index.  ``skip_final_gap`` drops the last gap
    (between the two smallest eigenvalues) from the search; this is a
    diagnostic variant, never the default.
    """
    sigma = np.asarray(getattr(spec, "eigenvalues", spec), dtype=float)
    sigma = np.sort(sigma)[::-1]
    N = sigma.size
    if N < 2:
        raise ValueError("need at least two eigenvalues")
    gaps = sigma[:-1] - sigma[1:]
    if skip_final_gap:
        if N < 3:
            return 1
        gaps = gaps[:-1]
    i = int(np.flatnonzero(gaps == gaps.max())[-1]) + 1
    return N - i


def _kmeanspp(Y, k, rng):
    N = Y.shape[0]
    centers = np.empty((k, Y.shape[1]))
    centers[0] = Y[rng.integers(N)]
    d2 = np.sum((Y - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        idx = rng.choice(N, p=d2 / total) if total > 0 else rng.integers(N)
        centers[j] = Y[idx]
        d2 = np.minimum(d2, np.sum((Y - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(Y, centers, max_iter, tol):
    prev = np.inf
    for _ in range(max_iter):
        D = (np.sum(Y ** 2, axis=1)[:, None] - 2 * Y @ centers.T
             + np.sum(centers ** 2, axis=1)[None, :])
        labels = np.argmin(D, axis=1)
        inertia = float(np.maximum(D[np.arange(Y.shape[0]), labels], 0).sum())
        for j in range(centers.shape[0]):
            members = labels == j
            if members.any():
                centers[j] = Y[members].mean(axis=0)
            else:
                # reseed an empty cluster at the worst-served point
                far = int(np.argmax(D[np.arange(Y.shape[0]), labels]))
                centers[j] = Y[far]
        if prev - inertia <= tol * max(prev if np.isfinite(prev) else inertia, 1e-300):
            break
        prev = inertia
    D = (np.sum(Y ** 2, axis=1)[:, None] - 2 * Y @ centers.T + np.sum(centers ** 2, axis=1)[None, :])
    labels = np.argmin(D, axis=1)
    inertia = float(np.maximum(D[np.arange(Y.shape[0]), labels], 0).sum())
    return labels, inertia


def kmeans(Y, k: int, seed: int = 0, n_init: int = 20, max_iter: int = 300, tol: float = 1e-8):
    """Seeded k-means with k-means++ starts; the run with the lowest inertia wins."""
    Y = np.asarray(Y, dtype=float)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, inertia = _lloyd(Y, _kmeanspp(Y, k, rng), max_iter, tol)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return best[0]


def spectral_cluster(W, n_clusters: int, seed: int = 0, spec: Optional[SpectralDecomposition] = None
                     ) -> ClusterLabels:
    """Cluster the graph with the row-normalized bottom eigenvectors of its normalized Laplacian."""
    W = np.asarray(W, dtype=float)
    N = W.shape[0]
    if n_clusters < 1:
        raise ValueError("need at least one cluster")
    if n_clusters == 1:
        return ClusterLabels(labels=np.zeros(N, dtype=int), L_hat=1)
    spec = normalized_laplacian(W) if spec is None else spec
    # eigenvalues are stored descending; the embedding uses the smallest ones
    E = spec.eigenvectors[:, ::-1][:, :n_clusters]
    norms = np.linalg.norm(E, axis=1)
    good = norms > 1e-12
    Y = E[good] / norms[good, None]
    labels = np.zeros(N, dtype=int)
    k = min(n_clusters, int(good.sum()))
    if k >= 1:
        labels[good] = kmeans(Y, k, seed=seed)
    for i in np.flatnonzero(~good):
        w = W[i].copy()
        w[~good] = 0.0
        labels[i] = labels[int(np.argmax(w))] if w.max() > 0 else 0
    _, labels = np.unique(labels, return_inverse=True)
    return ClusterLabels(labels=labels.astype(int), L_hat=int(labels.max()) + 1)


def _pipeline_from_coefficients(coef: CoefficientMatrix, n_clusters=None, seed: int = 0,
                                truth=None, true_L: Optional[int] = None) -> SSCResult:
    W = build_affinity(coef)
    spec = normalized_laplacian(W)
    L_hat = estimate_num_subspaces(spec)
    k = L_hat if n_clusters is None else int(n_clusters)
    clusters = spectral_cluster(W, k, seed=seed, spec=spec)
    metrics = None
    extra = {"L_hat_skip_final_gap": estimate_num_subspaces(spec, skip_final_gap=True)}
    if truth is not None:
        truth = np.asarray(truth)
        L = true_L if true_L is not None else int(np.unique(truth[truth > 0]).size)
        known = clusters if k == L else spectral_cluster(W, L, seed=seed, spec=spec)
        metrics = MetricsReport(
            feature_detection_error=feature_detection_error(coef, truth),
            clustering_error=clustering_error(known.labels, truth),
            num_subspaces_error=num_subspaces_error(L_hat, L),
            smallest_nonzero_eig=smallest_nonzero_eig(spec, L),
        )
    return SSCResult(coefficients=coef, W=W, spectrum=spec, labels=clusters.labels,
                     L_hat=L_hat, metrics=metrics, extra=extra)


def ssc_pipeline(X, n_clusters: Optional[int] = None, seed: int = 0,
                 tols: SolverTolerances = DEFAULT_TOLERANCES, truth=None,
                 threads: int = 1) -> SSCResult:
    """Run sparse subspace clustering end to end.

    Parameters
    ----------
    X : array, shape (n, N)
        Data points as columns; normalized on ingest.
    n_clusters : int, optional
        Overrides the eigen-gap estimate for the spectral clustering step.
    seed : int
        Seed of the k-means step.
    truth : array of int, optional
        Ground-truth labels (0 = outlier).  When given, ``metrics`` is filled;
        its clustering error uses the true number of subspaces.
    """
    coef = build_coefficient_matrix(X, tols, threads=threads)
    return _pipeline_from_coefficients(coef, n_clusters=n_clusters, seed=seed, truth=truth)


def classical_affinity(X, r: Optional[int] = None, rank_tol: Optional[float] = None) -> np.ndarray:
    """``|V V^T|`` from the rank-r SVD ``X = U S V^T``, diagonal removed.

    ``r`` defaults to the numerical rank of X.
    """
    X = np.asarray(X, dtype=float)
    n, N = X.shape
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    if r is None:
        tol = rank_tol if rank_tol is not None else s.max() * max(n, N) * np.finfo(float).eps
        r = int(np.sum(s > tol))
    if not 1 <= r <= min(n, N):
        raise RankTooLarge(f"rank {r} outside [1, {min(n, N)}]")
    V = Vt[:r].T
    W = np.abs(V @ V.T)
    np.fill_diagonal(W, 0.0)
    return 0.5 * (W + W.T)
