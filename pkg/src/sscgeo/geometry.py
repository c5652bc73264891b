"""Subspace and polytope geometry.

Principal angles, affinity and geodesic distance between subspaces; dual
directions and subspace incoherence; inradius of symmetric polytopes
``K(A) = conv(+-a_1, ..., +-a_m)`` through the circumradius of the polar
``K° = {z : ||A^T z||_inf <= 1}``; and the incoherence-vs-inradius check that
certifies the subspace detection property.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyExternalSet, TooFewPoints, UnboundedPolar
from .solver import DEFAULT_TOLERANCES, SolverTolerances, min_norm_dual_point, solve_dual, L1Problem

__all__ = [
    "check_orthonormal",
    "principal_angles",
    "affinity",
    "geodesic_distance",
    "DualDirectionSet",
    "dual_directions",
    "subspace_incoherence",
    "circumradius_polar",
    "inradius",
    "polar_vertices",
    "SubspaceCertificate",
    "check_geometric_condition",
]

EXACT_MAX_DIM = 3


def check_orthonormal(U, tol: float = 1e-10) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    d = U.shape[1]
    if d > U.shape[0]:
        raise DimensionMismatch("basis has more columns than rows")
    if np.max(np.abs(U.T @ U - np.eye(d)), initial=0.0) > tol:
        raise ValueError("basis columns are not orthonormal")
    return U


def _cosines(U1, U2) -> np.ndarray:
    U1 = check_orthonormal(U1)
    U2 = check_orthonormal(U2)
    if U1.shape[0] != U2.shape[0]:
        raise DimensionMismatch("bases live in different ambient dimensions")
    s = np.linalg.svd(U1.T @ U2, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def principal_angles(U1, U2) -> np.ndarray:
    """Principal angles (radians, ascending) between span(U1) and span(U2)."""
    return np.arccos(_cosines(U1, U2))


def affinity(U1, U2) -> float:
    """Root sum of squared cosines of the principal angles."""
    return float(np.sqrt(np.sum(_cosines(U1, U2) ** 2)))


def geodesic_distance(U1, U2) -> float:
    return float(np.linalg.norm(principal_angles(U1, U2)))


@dataclass
class DualDirectionSet:
    V: np.ndarray  # n x N_l, unit-norm columns in span(U)
    lambda_norms: np.ndarray
    kkt_residuals: np.ndarray


def dual_directions(X, U, tols: SolverTolerances = DEFAULT_TOLERANCES) -> DualDirectionSet:
    """Dual directions of the points ``X`` lying on the subspace spanned by ``U``.

    Each point is expressed in the coordinates ``a_i = U^T x_i``; its dual
    point against the remaining coordinates is embedded back as
    ``U lambda_i / ||lambda_i||``.
    """
    X = np.asarray(X, dtype=float)
    U = check_orthonormal(U)
    if X.shape[0] != U.shape[0]:
        raise DimensionMismatch("points and basis have different ambient dimensions")
    N = X.shape[1]
    if N < 2:
        raise TooFewPoints("dual directions need at least two points")
    A = U.T @ X
    if np.max(np.linalg.norm(X - U @ A, axis=0)) > 1e-8:
        raise ValueError("points do not lie in the span of the basis")
    V = np.empty((U.shape[0], N))
    norms = np.empty(N)
    kkt = np.empty(N)
    for i in range(N):
        dp = min_norm_dual_point(A[:, i], np.delete(A, i, axis=1), tols)
        norms[i] = dp.norm
        kkt[i] = dp.kkt_residual
        V[:, i] = U @ (dp.lambda_ / dp.norm)
    return DualDirectionSet(V=V, lambda_norms=norms, kkt_residuals=kkt)


def subspace_incoherence(V, others) -> float:
    """``max_x ||V^T x||_inf`` over the external points ``x``."""
    V = V.V if isinstance(V, DualDirectionSet) else np.asarray(V, dtype=float)
    others = np.asarray(others, dtype=float)
    if others.ndim == 1:
        others = others[:, None]
    if others.shape[1] == 0:
        raise EmptyExternalSet("no external points")
    return float(np.max(np.abs(V.T @ others)))


def _distinct_columns(A: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(A) > 1e-12, axis=0)
    signs = np.sign(A[lead, np.arange(A.shape[1])])
    B = A * signs
    _, keep = np.unique(np.round(B, 12).T, axis=0, return_index=True)
    return B[:, np.sort(keep)]


def polar_vertices(A, chunk: int = 20000) -> np.ndarray:
    """Vertices of ``{z : ||A^T z||_inf <= 1}`` up to sign, for dimension <= 3.

    Every vertex is the solution of ``d`` tight constraints
    ``a_j^T z = +-1``; all subsets are enumerated and filtered for feasibility.
    One representative of each antipodal pair is returned (as rows).
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    if d > EXACT_MAX_DIM:
        raise ValueError("exact polar enumeration is limited to dimension <= 3")
    if np.linalg.matrix_rank(A) < d:
        raise UnboundedPolar("columns do not span the space")
    A = _distinct_columns(A)
    m = A.shape[1]
    # sign patterns modulo global sign: first sign fixed to +1
    patterns = np.array([(1.0,) + p for p in itertools.product((1.0, -1.0), repeat=d - 1)])
    found = []
    combos = itertools.combinations(range(m), d)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=int)
        if block.size == 0:
            break
        M = A[:, block].transpose(1, 2, 0)  # (k, d, d): rows a_j^T
        det = np.linalg.det(M)
        M = M[np.abs(det) > 1e-12]
        if M.shape[0] == 0:
            continue
        rhs = np.broadcast_to(patterns[None, :, :], (M.shape[0],) + patterns.shape)
        Z = np.linalg.solve(M[:, None, :, :], rhs[..., None])[..., 0].reshape(-1, d)
        feas = np.max(np.abs(Z @ A), axis=1) <= 1.0 + 1e-9
        found.append(Z[feas])
    V = np.concatenate(found, axis=0) if found else np.empty((0, d))
    return V


def _sampled_polar_radius(A, n_samples, rng, tols) -> float:
    d = A.shape[0]
    best = 0.0
    dirs = rng.standard_normal((d, n_samples))
    dirs /= np.linalg.norm(dirs, axis=0)
    for k in range(n_samples):
        nu = solve_dual(L1Problem(dirs[:, k], A), tols).nu
        best = max(best, float(np.linalg.norm(nu)))
    return best


def circumradius_polar(A, mode: str = "auto", n_samples: int = 200, rng=None,
                       tols: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Circumradius of the polar set ``K°(A) = {z : ||A^T z||_inf <= 1}``.

    ``mode="exact"`` enumerates the vertices of the polar (dimension <= 3).
    ``mode="sampled"`` maximizes over dual LP vertices found in random
    directions, which is a lower bound on the true circumradius.
    ``mode="auto"`` picks exact whenever the dimension allows it.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    d = A.shape[0]
    if mode == "auto":
        mode = "exact" if d <= EXACT_MAX_DIM else "sampled"
    if np.linalg.matrix_rank(A) < d:
        raise UnboundedPolar("columns do not span the space")
    if mode == "exact":
        V = polar_vertices(A)
        return float(np.max(np.linalg.norm(V, axis=1)))
    if mode == "sampled":
        rng = np.random.default_rng(0) if rng is None else rng
        return _sampled_polar_radius(A, n_samples, rng, tols)
    raise ValueError(f"unknown mode {mode!r}")


def inradius(A, mode: str = "auto", n_samples: int = 200, rng=None,
             tols: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Inradius of ``conv(+-a_j)`` as the reciprocal of the polar circumradius.

    Exact in dimension <= 3; in sampled mode the value is an upper bound.
    """
    return 1.0 / circumradius_polar(A, mode=mode, n_samples=n_samples, rng=rng, tols=tols)


@dataclass
class SubspaceCertificate:
    label: int
    mu: float
    min_inradius: float
    exact: bool
    verdict: str  # HOLDS, FAILS or MAYBE
    max_kkt_residual: float
    inradii: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def check_geometric_condition(X, labels, bases: Sequence, tols: SolverTolerances = DEFAULT_TOLERANCES,
                              n_samples: int = 200, rng=None,
                              subspaces: Optional[Sequence[int]] = None) -> list[SubspaceCertificate]:
    """Compare incoherence against the smallest leave-one-out inradius per subspace.

    ``labels`` uses 1..L for subspace classes (0 marks outliers, which only
    ever enter as external points); ``bases[l-1]`` spans class ``l``.
    HOLDS means every point of the class has its l1 support inside the class.
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    rng = np.random.default_rng(0) if rng is None else rng
    wanted = range(1, len(bases) + 1) if subspaces is None else subspaces
    out = []
    for ell in wanted:
        U = check_orthonormal(bases[ell - 1])
        mine = labels == ell
        Xl = X[:, mine]
        dirs = dual_directions(Xl, U, tols)
        mu = subspace_incoherence(dirs, X[:, ~mine])
        A = U.T @ Xl
        d = U.shape[1]
        exact = d <= EXACT_MAX_DIM
        radii = []
        for i in range(A.shape[1]):
            try:
                r = inradius(np.delete(A, i, axis=1), mode="exact" if exact else "sampled",
                             n_samples=n_samples, rng=rng, tols=tols)
            except UnboundedPolar:
                r = 0.0
            radii.append(r)
        rmin = float(min(radii))
        if mu >= rmin:
            verdict = "FAILS"
        else:
            verdict = "HOLDS" if exact else "MAYBE"
        out.append(SubspaceCertificate(label=int(ell), mu=mu, min_inradius=rmin, exact=exact,
                                       verdict=verdict,
                                       max_kkt_residual=float(np.max(dirs.kkt_residuals)),
                                       inradii=[float(r) for r in radii]))
    return out
