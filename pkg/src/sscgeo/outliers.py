"""Outlier detection from the optimal values of the self-expression programs.

A point is declared an outlier when the l1 norm of its sparsest
self-expression exceeds ``lambda(gamma) * sqrt(n)`` (conjectured mode) or the
provable ``(1 - t) * lambda(gamma) * sqrt(n) / sqrt(e)`` (proven mode), where
``gamma = (N - 1) / n`` is the total point density.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, GammaOutOfRange

__all__ = [
    "CONJECTURED",
    "PROVEN",
    "DEFAULT_PROVEN_T",
    "threshold_lambda",
    "OutlierConfig",
    "OutlierReport",
    "detect_outliers",
    "outlier_pipeline",
]

CONJECTURED = "conjectured"
PROVEN = "proven"
DEFAULT_PROVEN_T = 1.0 - 1.0 / math.sqrt(2.0)


def threshold_lambda(gamma: float) -> float:
    """Threshold ratio function of the point density ``gamma >= 1``."""
    gamma = float(gamma)
    if not gamma >= 1.0:
        raise GammaOutOfRange(f"gamma={gamma} < 1: fewer points than the ambient dimension")
    if gamma <= math.e:
        return math.sqrt(2.0 / math.pi) / math.sqrt(gamma)
    return math.sqrt(2.0 / (math.pi * math.e)) / math.sqrt(math.log(gamma))


@dataclass
class OutlierConfig:
    mode: str = CONJECTURED
    t: Optional[float] = None
    gamma: Optional[float] = None  # derived from N and n when None

    def __post_init__(self):
        self.mode = self.mode.lower()
        if self.mode not in (CONJECTURED, PROVEN):
            raise ConfigError(f"unknown outlier mode {self.mode!r}")
        if self.t is None:
            self.t = DEFAULT_PROVEN_T if self.mode == PROVEN else 0.0
        # t = 1 is allowed as the degenerate zero threshold
        if not 0.0 <= self.t <= 1.0:
            raise ConfigError("t must lie in [0, 1]")

    def threshold(self, n: int, N: int) -> tuple[float, float]:
        gamma = self.gamma if self.gamma is not None else (N - 1) / n
        base = threshold_lambda(gamma) * math.sqrt(n)
        if self.mode == PROVEN:
            return (1.0 - self.t) * base / math.sqrt(math.e), gamma
        return base, gamma


@dataclass
class OutlierReport:
    flags: np.ndarray
    optvals: np.ndarray
    threshold_used: float
    mode: str
    t: float
    gamma: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "t": self.t,
            "gamma": self.gamma,
            "threshold": self.threshold_used,
            "flags": [bool(f) for f in self.flags],
            "optvals": ["inf" if math.isinf(v) else float(v) for v in self.optvals],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "OutlierReport":
        optvals = np.array([math.inf if v == "inf" else float(v) for v in d["optvals"]])
        return cls(flags=np.array(d["flags"], dtype=bool), optvals=optvals,
                   threshold_used=float(d["threshold"]), mode=d["mode"], t=float(d["t"]),
                   gamma=float(d["gamma"]))


def detect_outliers(optvals, n: int, cfg: OutlierConfig = None) -> OutlierReport:
    """Flag every point whose optimal value exceeds the configured threshold."""
    cfg = OutlierConfig() if cfg is None else cfg
    optvals = np.asarray(optvals, dtype=float)
    try:
        threshold, gamma = cfg.threshold(n, optvals.size)
    except GammaOutOfRange:
        # too few points for a threshold; only the all-inexpressible case is decidable
        if optvals.size and np.all(np.isinf(optvals)):
            return OutlierReport(flags=np.ones(optvals.size, dtype=bool), optvals=optvals,
                                 threshold_used=math.nan, mode=cfg.mode, t=cfg.t,
                                 gamma=(optvals.size - 1) / n)
        raise
    flags = optvals > threshold  # +inf always exceeds a finite threshold
    return OutlierReport(flags=flags, optvals=optvals, threshold_used=threshold,
                         mode=cfg.mode, t=cfg.t, gamma=gamma)


def outlier_pipeline(X, cfg: OutlierConfig = None, seed: int = 0, n_clusters=None, tols=None,
                     reuse_coefficients: bool = False):
    """Detect outliers, strip them and cluster the remaining points.

    Returns ``(report, inlier_index, ssc_result)``.  ``ssc_result`` is None when
    fewer than two points survive.  By default the remaining points are
    re-solved from scratch; ``reuse_coefficients`` restricts the full
    coefficient matrix instead.
    """
    from .clustering import (CoefficientMatrix, build_coefficient_matrix, ssc_pipeline,
                             _pipeline_from_coefficients)
    from .solver import DEFAULT_TOLERANCES

    tols = DEFAULT_TOLERANCES if tols is None else tols
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    coef = build_coefficient_matrix(X, tols)
    report = detect_outliers(coef.optvals, n, cfg)
    keep = np.flatnonzero(~report.flags)
    if keep.size < 2:
        return report, keep, None
    if reuse_coefficients:
        sub = CoefficientMatrix(Z=coef.Z[np.ix_(keep, keep)], optvals=coef.optvals[keep],
                                status=[coef.status[i] for i in keep])
        result = _pipeline_from_coefficients(sub, n_clusters=n_clusters, seed=seed)
    else:
        result = ssc_pipeline(X[:, keep], n_clusters=n_clusters, seed=seed, tols=tols)
    return report, keep, result
