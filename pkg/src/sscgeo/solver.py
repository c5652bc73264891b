"""Exact l1 minimization: primal solutions, dual solutions and dual points.

The primal program is ``min ||z||_1  s.t.  A z = y`` and its dual is
``max <y, nu>  s.t.  ||A^T nu||_inf <= 1``.  Both are solved through the
split LP ``z = z+ - z-`` with HiGHS, using a working set of columns that is
grown until no column outside it violates dual feasibility.  Every returned
solution is polished on its support and its duality gap is certified.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import highspy
import numpy as np
import quadprog
import scipy.linalg
from scipy.optimize import nnls

from .errors import DimensionMismatch, Infeasible, NonConvergence, Unbounded

__all__ = [
    "SolverTolerances",
    "DEFAULT_TOLERANCES",
    "L1Problem",
    "PrimalSolution",
    "DualSolution",
    "DualPoint",
    "CertificateVerdict",
    "solve_l1",
    "solve_dual",
    "l1_optval",
    "min_norm_dual_point",
    "check_dual_certificate",
]


@dataclass(frozen=True)
class SolverTolerances:
    """Tolerances used to certify solutions.

    feas_tol bounds ``||Az - y||_2`` and the dual infeasibility, gap_tol is
    the relative duality gap, qp_tol the KKT residual of the dual-point QP
    and support_rel the relative threshold for support extraction.
    """

    feas_tol: float = 1e-8
    gap_tol: float = 1e-6
    qp_tol: float = 1e-8
    support_rel: float = 1e-6
    max_rounds: int = 500


DEFAULT_TOLERANCES = SolverTolerances()


@dataclass
class L1Problem:
    y: np.ndarray
    A: np.ndarray
    excluded_index: Optional[int] = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.A = np.asarray(self.A, dtype=float)
        if self.A.ndim != 2:
            raise DimensionMismatch("A must be a 2-D matrix")
        if self.A.shape[0] != self.y.size:
            raise DimensionMismatch(
                f"y has length {self.y.size} but A has {self.A.shape[0]} rows")
        if self.A.shape[1] and np.any(np.linalg.norm(self.A, axis=0) == 0):
            raise ValueError("A has a zero column")
        if self.excluded_index is not None:
            if not 0 <= self.excluded_index < self.A.shape[1]:
                raise ValueError("excluded_index out of range")
            self.excluded_index = int(self.excluded_index)

    def active_columns(self) -> np.ndarray:
        idx = np.arange(self.A.shape[1])
        if self.excluded_index is not None:
            idx = np.delete(idx, self.excluded_index)
        return idx


@dataclass
class PrimalSolution:
    z: np.ndarray
    optval: float
    support: np.ndarray
    residual: float
    nu: np.ndarray
    gap: float


@dataclass
class DualSolution:
    nu: np.ndarray
    optval: float
    inf_feas: float


@dataclass
class DualPoint:
    lambda_: np.ndarray
    norm: float
    optval: float
    kkt_residual: float


@dataclass
class CertificateVerdict:
    status: str  # "PASS", "FAIL" or "PASS_VACUOUS"
    sign_residual: float
    inner_max: float
    outer_max: float

    @property
    def passed(self) -> bool:
        return self.status != "FAIL"


class _WorkingSetLP:
    """Persistent HiGHS model over a growing subset of dictionary columns."""

    def __init__(self, B: np.ndarray, y: np.ndarray):
        self.B = B
        n, m = B.shape
        self.inW = np.zeros(m, dtype=bool)
        self.blocks: list[np.ndarray] = []
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("random_seed", 0)
        empty_i = np.array([], dtype=np.int32)
        h.addRows(n, y, y, 0, empty_i, empty_i, np.array([], dtype=float))
        self.h = h

    def add(self, idx) -> None:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            return
        n = self.B.shape[0]
        k = idx.size
        block = self.B[:, idx]
        # dense column-wise layout of [block, -block]
        values = np.concatenate([block, -block], axis=1).T.ravel()
        starts = np.arange(2 * k, dtype=np.int32) * np.int32(n)
        rows = np.tile(np.arange(n, dtype=np.int32), 2 * k)
        self.h.addCols(2 * k, np.ones(2 * k), np.zeros(2 * k),
                       np.full(2 * k, highspy.kHighsInf),
                       values.size, starts, rows, values)
        self.inW[idx] = True
        self.blocks.append(idx)

    def run(self):
        self.h.run()
        return self.h.getModelStatus()

    def primal(self) -> np.ndarray:
        vals = np.asarray(self.h.getSolution().col_value)
        z = np.zeros(self.B.shape[1])
        pos = 0
        for block in self.blocks:
            k = block.size
            z[block] = vals[pos:pos + k] - vals[pos + k:pos + 2 * k]
            pos += 2 * k
        return z

    def dual(self) -> np.ndarray:
        return np.asarray(self.h.getSolution().row_dual, dtype=float)


def _basis_pursuit_raw(B: np.ndarray, y: np.ndarray, tols: SolverTolerances):
    """Unpolished primal/dual pair for min ||z||_1 s.t. Bz = y."""
    n, m = B.shape
    if m == 0:
        raise Infeasible("empty dictionary")
    corr = np.abs(B.T @ y)
    order = np.argsort(-corr, kind="stable")
    k0 = m if m <= 3 * n else 2 * n
    lp = _WorkingSetLP(B, y)
    lp.add(order[:k0])
    batch = max(10, n // 2)
    for _ in range(tols.max_rounds):
        status = lp.run()
        if status == highspy.HighsModelStatus.kInfeasible:
            rest = np.flatnonzero(~lp.inW)
            if rest.size == 0:
                raise Infeasible("target is not in the span of the dictionary")
            lp.add(rest[np.argsort(-corr[rest], kind="stable")])
            continue
        if status != highspy.HighsModelStatus.kOptimal:
            raise NonConvergence(f"LP solver status: {lp.h.modelStatusToString(status)}")
        nu = lp.dual()
        viol = np.abs(B.T @ nu)
        viol[lp.inW] = 0.0
        cand = np.flatnonzero(viol > 1.0 + 1e-9)
        if cand.size == 0:
            return lp.primal(), nu
        lp.add(cand[np.argsort(-viol[cand], kind="stable")][:batch])
    raise NonConvergence("working-set iteration budget exhausted")


def _polish(B, y, z, nu, tols):
    zmax = np.max(np.abs(z)) if z.size else 0.0
    S = np.flatnonzero(np.abs(z) > tols.support_rel * zmax)
    if S.size:
        AS = B[:, S]
        zS, _, rank, _ = scipy.linalg.lstsq(AS, y, lapack_driver="gelsy")
        if rank == S.size and np.all(np.sign(zS) == np.sign(z[S])):
            cand = np.zeros_like(z)
            cand[S] = zS
            if np.linalg.norm(B @ cand - y) <= np.linalg.norm(B @ z - y):
                z = cand
        # enforce A_S^T nu = sgn(z_S) with the smallest correction
        r = np.sign(z[S]) - AS.T @ nu
        delta = scipy.linalg.lstsq(AS.T, r, lapack_driver="gelsy")[0]
        candidates = [nu, nu + delta]
    else:
        candidates = [nu]
    l1 = np.abs(z).sum()
    best = None
    for c in candidates:
        scale = max(1.0, float(np.max(np.abs(B.T @ c))))
        c = c / scale
        gap = abs(l1 - float(y @ c))
        if best is None or gap < best[1]:
            best = (c, gap)
    return z, best[0], best[1]


def _solve_core(B: np.ndarray, y: np.ndarray, tols: SolverTolerances):
    n, m = B.shape
    if not np.any(y):
        return np.zeros(m), np.zeros(n), 0.0
    z, nu = _basis_pursuit_raw(B, y, tols)
    z, nu, gap = _polish(B, y, z, nu, tols)
    return z, nu, gap


def solve_l1(prob: L1Problem, tols: SolverTolerances = DEFAULT_TOLERANCES) -> PrimalSolution:
    """Solve ``min ||z||_1`` subject to ``A z = y`` (and ``z[excluded] = 0``).

    Raises
    ------
    Infeasible
        If ``y`` is not in the span of the admissible columns.
    NonConvergence
        If the polished solution does not meet the feasibility or gap tolerance.
    """
    cols = prob.active_columns()
    B = prob.A[:, cols]
    zB, nu, gap = _solve_core(B, prob.y, tols)
    z = np.zeros(prob.A.shape[1])
    z[cols] = zB
    optval = float(np.abs(z).sum())
    residual = float(np.linalg.norm(prob.A @ z - prob.y))
    if residual > tols.feas_tol * max(1.0, float(np.linalg.norm(prob.y))):
        raise NonConvergence(f"primal residual {residual:.3e} exceeds tolerance")
    if gap > tols.gap_tol * max(1.0, optval):
        raise NonConvergence(f"duality gap {gap:.3e} exceeds tolerance")
    zmax = np.max(np.abs(z)) if z.size else 0.0
    support = np.flatnonzero(np.abs(z) > tols.support_rel * zmax) if zmax > 0 else np.array([], int)
    return PrimalSolution(z=z, optval=optval, support=support, residual=residual, nu=nu, gap=gap)


def solve_dual(prob: L1Problem, tols: SolverTolerances = DEFAULT_TOLERANCES) -> DualSolution:
    """Solve ``max <y, nu>`` subject to ``||A^T nu||_inf <= 1``.

    The excluded column, if any, is dropped from the constraint set.
    """
    try:
        sol = solve_l1(prob, tols)
    except Infeasible as exc:
        raise Unbounded(str(exc)) from exc
    A = prob.A[:, prob.active_columns()]
    inf_feas = max(0.0, float(np.max(np.abs(A.T @ sol.nu), initial=0.0)) - 1.0)
    return DualSolution(nu=sol.nu, optval=float(prob.y @ sol.nu), inf_feas=inf_feas)


def l1_optval(y, A, excluded_index=None, tols: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Optimal value of the l1 program, ``inf`` when ``y`` is not expressible."""
    try:
        return solve_l1(L1Problem(y, A, excluded_index), tols).optval
    except Infeasible:
        return float("inf")


def _dedupe_constraints(M: np.ndarray) -> np.ndarray:
    """Indices of columns of M that are pairwise distinct up to sign."""
    if M.shape[1] == 0:
        return np.arange(0)
    lead = np.argmax(np.abs(M) > 1e-12, axis=0)
    signs = np.sign(M[lead, np.arange(M.shape[1])])
    signs[signs == 0] = 1.0
    key = np.round(M * signs, 11).T
    _, keep = np.unique(key, axis=0, return_index=True)
    return np.sort(keep)


def _kkt_residual(lam, AS, sS, AR, active_tol=1e-7):
    """Least-squares residual of the stationarity condition of the dual-point QP."""
    g = AR.T @ lam
    J = np.flatnonzero(np.abs(g) >= 1.0 - active_tol)
    parts = [AS, -AS, -(AR[:, J] * np.sign(g[J]))]
    M = np.concatenate(parts, axis=1)
    if M.shape[1] == 0:
        return float(np.linalg.norm(lam))
    _, res = nnls(M, lam, maxiter=50 * M.shape[1])
    return float(res)


def min_norm_dual_point(y, A, tols: SolverTolerances = DEFAULT_TOLERANCES) -> DualPoint:
    """Minimum Euclidean norm point among the optimal solutions of the dual program.

    The optimal dual face is ``{lam : A_S^T lam = sgn(z_S), ||A^T lam||_inf <= 1}``
    for any primal optimum ``z`` with support ``S``; the point is the projection
    of the origin onto that face, computed with a dual active-set QP and then
    checked against the KKT conditions.
    """
    prob = L1Problem(y, A)
    try:
        sol = solve_l1(prob, tols)
    except Infeasible as exc:
        raise Unbounded(str(exc)) from exc
    A = prob.A
    d = A.shape[0]
    if sol.optval == 0.0:
        return DualPoint(lambda_=np.zeros(d), norm=0.0, optval=0.0, kkt_residual=0.0)
    S = sol.support
    sS = np.sign(sol.z[S])
    rest = np.setdiff1d(np.arange(A.shape[1]), S)
    AS = A[:, S]
    # constraints implied by an equality (parallel columns) are dropped
    AR = A[:, rest]
    if AR.shape[1]:
        stacked = np.concatenate([AS, AR], axis=1)
        keep = _dedupe_constraints(stacked)
        keep = keep[keep >= S.size] - S.size
        AR = AR[:, keep]
    C = np.concatenate([AS, AR, -AR], axis=1)
    b = np.concatenate([sS, -np.ones(AR.shape[1]), -np.ones(AR.shape[1])])
    try:
        lam = quadprog.solve_qp(np.eye(d), np.zeros(d), C, b, S.size)[0]
    except ValueError as exc:
        raise NonConvergence(f"dual-point QP failed: {exc}") from exc

    infeas = float(np.max(np.abs(A.T @ lam))) - 1.0
    if infeas > tols.feas_tol:
        raise NonConvergence(f"dual point infeasible by {infeas:.3e}")
    value = float(prob.y @ lam)
    if value < sol.optval - tols.gap_tol * max(1.0, sol.optval):
        raise NonConvergence("dual point is not optimal")
    kkt = _kkt_residual(lam, AS, sS, AR)
    if kkt > tols.qp_tol * max(1.0, float(np.linalg.norm(lam))):
        raise NonConvergence(f"dual point KKT residual {kkt:.3e} exceeds tolerance")
    return DualPoint(lambda_=lam, norm=float(np.linalg.norm(lam)), optval=sol.optval,
                     kkt_residual=kkt)


def check_dual_certificate(c, S: Sequence[int], T: Sequence[int], A, nu,
                           tol: float = 1e-9) -> CertificateVerdict:
    """Check the sufficient condition that forces every l1 optimum onto ``T``.

    PASS requires ``A_S^T nu = sgn(c_S)``, ``||A_{T\\S}^T nu||_inf <= 1`` and
    ``||A_{T^c}^T nu||_inf < 1``, each up to ``tol``.  An empty ``T^c`` makes
    the strict condition vacuous and is reported as ``PASS_VACUOUS``.
    """
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float).ravel()
    nu = np.asarray(nu, dtype=float).ravel()
    N = A.shape[1]
    if c.size != N or nu.size != A.shape[0]:
        raise DimensionMismatch("c, nu and A have inconsistent sizes")
    S = np.asarray(sorted(set(int(i) for i in S)), dtype=int)
    T = np.asarray(sorted(set(int(i) for i in T)), dtype=int)
    if not set(S.tolist()) <= set(T.tolist()):
        raise ValueError("S must be a subset of T")
    if np.any(c[np.setdiff1d(np.arange(N), S)] != 0):
        raise ValueError("c must be supported on S")
    g = A.T @ nu
    sign_res = float(np.max(np.abs(g[S] - np.sign(c[S])), initial=0.0))
    inner = float(np.max(np.abs(g[np.setdiff1d(T, S)]), initial=0.0))
    Tc = np.setdiff1d(np.arange(N), T)
    outer = float(np.max(np.abs(g[Tc]), initial=0.0))
    ok = sign_res <= tol and inner <= 1.0 + tol
    if Tc.size == 0:
        status = "PASS_VACUOUS" if ok else "FAIL"
    else:
        status = "PASS" if ok and outer < 1.0 - tol else "FAIL"
    return CertificateVerdict(status, sign_res, inner, outer)
