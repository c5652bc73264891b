"""Seeded generators for unions of subspaces, outliers and noise.

Random streams come from ``numpy.random.SeedSequence`` keyed by
``(seed, *key)`` so every trial/subspace draws from its own independent
stream, independent of generation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionInfeasible

__all__ = [
    "DataSet",
    "make_rng",
    "random_subspace",
    "sample_on_subspace",
    "gen_fully_random",
    "gen_semi_random",
    "gen_intersecting_pair",
    "gen_three_subspace_grid",
    "gen_outliers",
    "with_outliers",
    "add_noise",
    "orthonormalize",
]


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the stream ``(seed, key...)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _normalize_columns(X: np.ndarray) -> np.ndarray:
    return X / np.linalg.norm(X, axis=0, keepdims=True)


@dataclass
class DataSet:
    X: np.ndarray
    labels: Optional[np.ndarray] = None  # 0 = outlier, l >= 1 = subspace l
    bases: Optional[list] = None  # bases[l - 1] spans subspace l
    seed: Optional[int] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.size != self.X.shape[1]:
                raise ValueError("one label per column is required")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def N(self) -> int:
        return self.X.shape[1]

    @property
    def num_subspaces(self) -> int:
        if self.bases is not None:
            return len(self.bases)
        return int(np.unique(self.labels[self.labels > 0]).size)

    def inliers(self) -> np.ndarray:
        return np.flatnonzero(self.labels > 0)


def orthonormalize(G: np.ndarray) -> np.ndarray:
    """Householder QR with the sign convention ``diag(R) > 0``."""
    Q, R = np.linalg.qr(G)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s


def random_subspace(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of a uniformly distributed d-dimensional subspace of R^n."""
    if not 0 <= d <= n:
        raise DimensionInfeasible(f"cannot draw a {d}-dimensional subspace of R^{n}")
    return orthonormalize(rng.standard_normal((n, d)))


def sample_on_subspace(U: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """m unit vectors drawn uniformly on the unit sphere of span(U)."""
    g = _normalize_columns(rng.standard_normal((U.shape[1], m)))
    return _normalize_columns(U @ g)


def gen_semi_random(bases: Sequence[np.ndarray], counts: Sequence[int], rng: np.random.Generator,
                    seed: Optional[int] = None, model: str = "semi_random") -> DataSet:
    """Uniform points on fixed subspaces, class l for ``bases[l - 1]``."""
    if len(bases) != len(counts):
        raise ValueError("one count per basis is required")
    streams = rng.spawn(len(bases))
    blocks, labels = [], []
    for ell, (U, m, r) in enumerate(zip(bases, counts, streams), start=1):
        blocks.append(sample_on_subspace(U, int(m), r))
        labels.append(np.full(int(m), ell))
    X = np.concatenate(blocks, axis=1) if blocks else np.empty((0, 0))
    return DataSet(X=X, labels=np.concatenate(labels), bases=list(bases), seed=seed,
                   provenance={"model": model, "counts": [int(c) for c in counts]})


def gen_fully_random(n: int, d: int, L: int, rho: float, rng: np.random.Generator,
                     seed: Optional[int] = None, points: Optional[int] = None) -> DataSet:
    """L random d-dimensional subspaces with ``floor(rho d) + 1`` points each.

    ``points`` overrides the per-subspace count.
    """
    m = int(points) if points is not None else math.floor(rho * d) + 1
    basis_rng, point_rng = rng.spawn(2)
    bases = [random_subspace(n, d, r) for r in basis_rng.spawn(L)]
    ds = gen_semi_random(bases, [m] * L, point_rng, seed=seed, model="fully_random")
    ds.provenance.update({"n": n, "d": d, "L": L, "rho": rho, "points_per_subspace": m})
    return ds


def gen_intersecting_pair(n: int, d: int, s: int, rng: np.random.Generator):
    """Two d-dimensional subspaces whose intersection has dimension exactly s.

    The first subspace is uniform; the second is the sum of a uniform
    s-dimensional subspace of the first and an unconstrained uniform
    (d - s)-dimensional subspace of R^n.
    """
    if not 0 <= s <= d:
        raise DimensionInfeasible("need 0 <= s <= d")
    if 2 * d - s > n:
        raise DimensionInfeasible("need 2d - s <= n")
    r1, r2, r3 = rng.spawn(3)
    U1 = random_subspace(n, d, r1)
    shared = U1 @ random_subspace(d, s, r2)
    free = random_subspace(n, d - s, r3)
    U2 = orthonormalize(np.concatenate([shared, free], axis=1))
    return U1, U2


def gen_three_subspace_grid(d: int, theta: float, alpha: float):
    """Three d-dimensional subspaces of R^{2d} with controlled principal angles.

    ``U1 = [I; 0]``, ``U2 = [0; I]`` and ``U3 = [diag(cos t_i); diag(sin t_i)]``
    with ``cos t_i = (1 - a (i - 1)) cos(theta)``, ``a = (1 - alpha)/(d - 1)``.
    """
    if d < 2:
        raise DimensionInfeasible("need d >= 2")
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise ValueError("theta must lie in [0, pi/2]")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    a = (1.0 - alpha) / (d - 1)
    cos = (1.0 - a * np.arange(d)) * math.cos(theta)
    cos = np.clip(cos, 0.0, 1.0)
    sin = np.sqrt(1.0 - cos ** 2)
    I, Z = np.eye(d), np.zeros((d, d))
    U1 = np.vstack([I, Z])
    U2 = np.vstack([Z, I])
    U3 = np.vstack([np.diag(cos), np.diag(sin)])
    return U1, U2, U3


def gen_outliers(n: int, N0: int, rng: np.random.Generator) -> np.ndarray:
    """N0 points uniform on the unit sphere of R^n."""
    return _normalize_columns(rng.standard_normal((n, N0)))


def with_outliers(ds: DataSet, N0: int, rng: np.random.Generator) -> DataSet:
    """Append N0 uniform outliers (label 0) after the inliers."""
    O = gen_outliers(ds.n, N0, rng)
    labels = np.concatenate([ds.labels, np.zeros(N0, dtype=int)])
    prov = dict(ds.provenance, N0=int(N0))
    return DataSet(X=np.concatenate([ds.X, O], axis=1), labels=labels, bases=ds.bases,
                   seed=ds.seed, provenance=prov)


def add_noise(ds: DataSet, sigma: float, rng: np.random.Generator) -> DataSet:
    """Perturb each column by a uniform vector of norm sigma and renormalize."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return DataSet(X=ds.X.copy(), labels=ds.labels, bases=ds.bases, seed=ds.seed,
                       provenance=dict(ds.provenance, sigma=0.0))
    Z = sigma * gen_outliers(ds.n, ds.N, rng)
    return DataSet(X=_normalize_columns(ds.X + Z), labels=ds.labels, bases=ds.bases, seed=ds.seed,
                   provenance=dict(ds.provenance, sigma=float(sigma)))
