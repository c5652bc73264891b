"""Evaluators for the sufficient conditions of the recovery theorems.

Only printed formulas are evaluated; nothing here is a probability
computation beyond plugging numbers into the stated lower bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .outliers import DEFAULT_PROVEN_T, threshold_lambda

__all__ = [
    "DensityConstant",
    "eval_fullrandom_bound",
    "eval_semirandom_bound",
    "eval_semirandom_simplified",
    "eval_outlier_bounds",
]


@dataclass(frozen=True)
class DensityConstant:
    """The density-dependent constant c(rho).

    Only ``c(rho) = 1/sqrt(8)`` for ``rho >= rho0`` is known; below ``rho0``
    ``c_low`` is used (defaults to the same value).
    """

    c_rho: float = 1.0 / math.sqrt(8.0)
    rho0: float = 2.0
    c_low: Optional[float] = None

    def __call__(self, rho: float) -> float:
        if rho >= self.rho0 or self.c_low is None:
            return self.c_rho
        return self.c_low


def _effective_rho(rho, d, cap):
    return min(rho, math.exp(d / 2.0)) if cap else rho


def eval_fullrandom_bound(n: int, d: int, L: int, rho: float, beta: float = 0.5,
                          c: DensityConstant = DensityConstant(), cap_density: bool = True) -> dict:
    """Largest admissible subspace dimension in the fully random model.

    ``d_max = 2 beta c(rho)^2 log(rho) n / (12 log N)`` with ``N = L(floor(rho d) + 1)``;
    ``beta = 1/2`` is the headline condition.  ``cap_density`` replaces rho by
    ``min(rho, e^{d/2})``.  The success probability lower bound is
    ``1 - 2/N - N exp(-rho^(1-beta) d)``.
    """
    if not rho > 1:
        raise ValueError("rho must exceed 1")
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    N = L * (math.floor(rho * d) + 1)
    r = _effective_rho(rho, d, cap_density)
    cr = c(r)
    d_max = 2.0 * beta * cr ** 2 * math.log(r) / (12.0 * math.log(N)) * n
    prob = 1.0 - 2.0 / N - N * math.exp(-(r ** (1.0 - beta)) * d)
    return {"d_max": d_max, "satisfied": d < d_max, "prob_bound": prob, "N": N, "rho_eff": r,
            "c_rho": cr}


def eval_semirandom_bound(affinities, counts: Sequence[int], dims: Sequence[int], t: float,
                          c: DensityConstant = DensityConstant()) -> dict:
    """Per ordered pair (k, l) check of the affinity condition.

    ``lhs[k, l] = 4 sqrt(2) (log[N_l (N_k + 1)] + log L + t) aff(S_k, S_l) / sqrt(d_k)``
    is compared to ``rhs[l] = c(rho_l) sqrt(log rho_l)`` with ``rho_l = (N_l - 1)/d_l``.
    """
    aff = np.asarray(affinities, dtype=float)
    Ns = np.asarray(counts, dtype=float)
    ds = np.asarray(dims, dtype=float)
    L = Ns.size
    if aff.shape != (L, L):
        raise ValueError("affinity matrix must be L x L")
    rhos = (Ns - 1.0) / ds
    rhs = np.array([c(r) * math.sqrt(math.log(r)) if r > 1 else 0.0 for r in rhos])
    lhs = np.zeros((L, L))
    for k in range(L):
        for l in range(L):
            if k != l:
                lhs[k, l] = (4.0 * math.sqrt(2.0) * (math.log(Ns[l] * (Ns[k] + 1.0)) + math.log(L) + t)
                             * aff[k, l] / math.sqrt(ds[k]))
    satisfied = lhs < rhs[None, :]
    np.fill_diagonal(satisfied, True)
    tail = sum(4.0 * math.exp(-2.0 * t) / ((Ns[k] + 1.0) * Ns[l])
               for k in range(L) for l in range(L) if k != l)
    prob = 1.0 - float(np.sum(Ns * np.exp(-np.sqrt(ds) * np.sqrt(Ns - 1.0)))) - tail / L ** 2
    return {"lhs": lhs, "rhs": rhs, "satisfied": satisfied, "all_satisfied": bool(satisfied.all()),
            "prob_bound": prob}


def eval_semirandom_simplified(aff: float, d: int, rho: float, L: int, t: float, beta: float = 0.5,
                               c: DensityConstant = DensityConstant()) -> dict:
    """Equal-dimension form: ``aff/sqrt(d) < c(rho) sqrt(beta log rho) / (4 (2 log N + t))``.

    ``beta = 1/2`` gives the ``4 sqrt(2)`` form; ``N = L(rho d + 1)``.
    """
    N = L * (rho * d + 1.0)
    lhs = aff / math.sqrt(d)
    rhs = c(rho) * math.sqrt(beta * math.log(rho)) / (4.0 * (2.0 * math.log(N) + t))
    prob = 1.0 - N * math.exp(-(rho ** (1.0 - beta)) * d) - 2.0 / ((rho * d) * (rho * d + 1.0)) * math.exp(-2.0 * t)
    return {"lhs": lhs, "rhs": rhs, "satisfied": lhs < rhs, "prob_bound": prob, "N": N}


def eval_outlier_bounds(n: int, N: int, t: float = DEFAULT_PROVEN_T, dims: Sequence[int] = (),
                        rhos: Sequence[float] = (), inradii: Optional[Sequence[float]] = None,
                        c: DensityConstant = DensityConstant()) -> dict:
    """Proven outlier threshold and the two no-false-positive conditions.

    Both conditions share the right-hand side ``(1 - t) lambda(gamma) sqrt(n) / sqrt(e)``.
    The deterministic one compares ``max 1/r`` (needs ``inradii``); the
    semi-random one compares ``max sqrt(2 d_l) / (c(rho_l) sqrt(log rho_l))``.
    """
    gamma = (N - 1) / n
    threshold = (1.0 - t) * threshold_lambda(gamma) / math.sqrt(math.e) * math.sqrt(n)
    out = {"gamma": gamma, "proven_threshold": threshold, "rhs_2_10": threshold,
           "rhs_2_11": threshold, "conjectured_threshold": threshold_lambda(gamma) * math.sqrt(n)}
    if len(dims):
        lhs = max(math.sqrt(2.0 * d) / (c(r) * math.sqrt(math.log(r))) for d, r in zip(dims, rhos))
        out["lhs_2_11"] = lhs
        out["satisfied_2_11"] = lhs < threshold
    if inradii is not None and len(inradii):
        lhs = max(1.0 / r for r in inradii)
        out["lhs_2_10"] = lhs
        out["satisfied_2_10"] = lhs < threshold
    return out
