"""Evaluation metrics for subspace clustering runs."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "MetricsReport",
    "feature_detection_error",
    "clustering_error",
    "num_subspaces_error",
    "smallest_nonzero_eig",
    "sdp_eigen_check",
]

SMALLEST_EIG_CONVENTION = "(L+1)-th smallest eigenvalue of L_N; source phrasing: '(N-L)+1th smallest'"


@dataclass
class MetricsReport:
    feature_detection_error: float
    clustering_error: float
    num_subspaces_error: int
    smallest_nonzero_eig: float
    eig_convention: str = SMALLEST_EIG_CONVENTION

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv_row(self, header: bool = False) -> str:
        d = self.to_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(d.keys())
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in d.values()])
        return buf.getvalue()


def _as_Z(Z) -> np.ndarray:
    return np.asarray(getattr(Z, "Z", Z), dtype=float)


def feature_detection_error(Z, labels, include_outliers: bool = False) -> float:
    """Mean over points of ``1 - ||z_i on own class||_1 / ||z_i||_1``.

    Column i holds the coefficients of point i.  A zero column counts as a
    full error.  Outlier columns (label 0) are skipped unless requested.
    """
    Z = np.abs(_as_Z(Z))
    labels = np.asarray(labels)
    cols = np.arange(Z.shape[1]) if include_outliers else np.flatnonzero(labels != 0)
    if cols.size == 0:
        return 0.0
    total = Z[:, cols].sum(axis=0)
    # foreign mass over total is exactly 0 when the support is inside the class
    foreign = np.array([Z[labels != labels[i], i].sum() for i in cols])
    terms = np.ones(cols.size)
    ok = total > 0
    terms[ok] = foreign[ok] / total[ok]
    return float(np.clip(terms, 0.0, 1.0).mean())


def clustering_error(pred, truth, include_outliers: bool = False) -> float:
    """Fraction of misclassified points under the best matching of label names."""
    pred = np.asarray(getattr(pred, "labels", pred))
    truth = np.asarray(truth)
    if pred.size != truth.size:
        raise ValueError("pred and truth must cover the same points")
    if not include_outliers:
        keep = truth != 0
        pred, truth = pred[keep], truth[keep]
    if truth.size == 0:
        return 0.0
    pu, pi = np.unique(pred, return_inverse=True)
    tu, ti = np.unique(truth, return_inverse=True)
    C = np.zeros((pu.size, tu.size))
    np.add.at(C, (pi, ti), 1.0)
    r, c = linear_sum_assignment(C, maximize=True)
    return float(1.0 - C[r, c].sum() / truth.size)


def num_subspaces_error(L_hat: int, L: int) -> int:
    return int(L_hat != L)


def _ascending(spec) -> np.ndarray:
    ev = np.asarray(getattr(spec, "eigenvalues", spec), dtype=float)
    return np.sort(ev)


def smallest_nonzero_eig(spec, L: int) -> float:
    """(L+1)-th smallest eigenvalue of the normalized Laplacian.

    With the subspace detection property the first L eigenvalues vanish and
    this value is positive.
    """
    ev = _ascending(spec)
    if L >= ev.size:
        return 0.0
    return float(ev[L])


def sdp_eigen_check(spec, L: int, zero_tol: float = 1e-8) -> bool:
    """True when exactly the L smallest eigenvalues vanish."""
    ev = _ascending(spec)
    return bool(np.all(ev[:L] <= zero_tol) and (L >= ev.size or ev[L] > zero_tol))
