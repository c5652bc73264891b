"""Seeded synthetic experiments and their result files.

Each ``run_<id>`` takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult`.  Parameters default to desk-scale sizes; the
``params`` mapping overrides any of them.  Every trial draws from its own
random stream keyed by ``(seed, experiment, grid cell, trial)``.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .bounds import (DensityConstant, eval_fullrandom_bound, eval_outlier_bounds,
                     eval_semirandom_bound)
from .clustering import (build_coefficient_matrix, classical_affinity, estimate_num_subspaces,
                         normalized_laplacian, ssc_pipeline)
from .datagen import (add_noise, gen_fully_random, gen_intersecting_pair, gen_semi_random,
                      gen_three_subspace_grid, make_rng, random_subspace, with_outliers)
from .errors import ConfigError
from .geometry import affinity
from .io import FLOAT_FMT, write_json
from .outliers import PROVEN, OutlierConfig, detect_outliers
from .solver import DEFAULT_TOLERANCES, SolverTolerances

__all__ = [
    "EXPERIMENT_IDS",
    "DEFAULTS",
    "ExperimentConfig",
    "ExperimentResult",
    "run_experiment",
    "run_intersection",
    "run_affinity_grid",
    "run_dim_sweep",
    "run_noise_sweep",
    "run_classical_compare",
    "run_outlier_gap",
    "run_bound_report",
    "write_result",
]

EXPERIMENT_IDS = ("intersection", "affinity_grid", "dim_sweep", "noise_sweep",
                  "classical_compare", "outlier_gap", "bound_report")

# desk-scale defaults; ratios (n/d, points per dimension, N0/Nd) follow the original studies
DEFAULTS = {
    "intersection": {"n": 100, "d": 10, "points_factor": 20, "s_values": [0, 1, 2, 3, 4, 5, 6],
                     "trials": 5},
    "affinity_grid": {"d": 8, "alpha": 0.5, "rhos": [2.0, 4.0, 6.0],
                      "thetas": [0.0, math.pi / 6, math.pi / 3, 5 * math.pi / 12, math.pi / 2], "trials": 1},
    "dim_sweep": {"n": 50, "L": 20, "dims": [5, 10, 15, 20, 25], "points_factor": 4, "trials": 1},
    "noise_sweep": {"n": 50, "L": 10, "d": 20, "points_factor": 4,
                    "sigmas": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4], "trials": 1},
    "classical_compare": {"n": 50, "L": 10, "dims": [10, 30], "points_factor": 4,
                          "sigmas": [0.0, 0.1], "rank": None, "trials": 1},
    "outlier_gap": {"n": 50, "d": 5, "points_factor": 5, "outlier_ratio": 1.0, "t": None,
                    "trials": 1},
    "bound_report": {"n": 50, "L": 10, "dims": [2, 5, 7, 10], "rho": 4.0, "beta": 0.5, "t": 1.0,
                     "c_rho": 1.0 / math.sqrt(8.0), "rho0": 2.0, "trials": 1},
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    tols: SolverTolerances = DEFAULT_TOLERANCES
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        unknown = set(self.params) - set(DEFAULTS[self.experiment])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")

    def resolved(self) -> dict:
        p = dict(DEFAULTS[self.experiment])
        p.update(self.params)
        if int(p["trials"]) < 1:
            raise ConfigError("trials must be >= 1")
        return p

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed, "params": self.resolved(),
                "tols": asdict(self.tols), "threads": self.threads}

    def rng(self, cell: int, trial: int, *extra: int) -> np.random.Generator:
        return make_rng(self.seed, EXPERIMENT_IDS.index(self.experiment), cell, trial, *extra)


@dataclass
class ExperimentResult:
    experiment: str
    config: dict
    rows: list
    aggregates: list
    spectra: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    version: str = __version__


METRIC_KEYS = ("feature_detection_error", "clustering_error", "num_subspaces_error",
               "smallest_nonzero_eig")


def _aggregate(rows: list, keys: tuple, values: tuple) -> list:
    """Mean of ``values`` over rows sharing the same ``keys``, in first-seen order."""
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key, members in groups.items():
        agg = dict(zip(keys, key))
        agg["trials"] = len(members)
        for v in values:
            agg[f"mean_{v}"] = float(np.mean([m[v] for m in members]))
        out.append(agg)
    return out


def _ssc_row(ds, cfg: ExperimentConfig, seed: int) -> tuple[dict, np.ndarray]:
    res = ssc_pipeline(ds.X, seed=seed, tols=cfg.tols, truth=ds.labels, threads=cfg.threads)
    row = {k: getattr(res.metrics, k) for k in METRIC_KEYS}
    row["L_hat"] = res.L_hat
    row["L_hat_skip_final_gap"] = res.extra["L_hat_skip_final_gap"]
    return row, np.sort(res.spectrum.eigenvalues)


def run_intersection(cfg: ExperimentConfig) -> ExperimentResult:
    """Two d-dimensional subspaces sharing an s-dimensional intersection."""
    p = cfg.resolved()
    n, d, m = p["n"], p["d"], p["points_factor"] * p["d"]
    rows = []
    for cell, s in enumerate(p["s_values"]):
        for trial in range(p["trials"]):
            rng = cfg.rng(cell, trial)
            U1, U2 = gen_intersecting_pair(n, d, int(s), rng)
            ds = gen_semi_random([U1, U2], [m, m], rng)
            row, _ = _ssc_row(ds, cfg, seed=trial)
            row.update({"s": int(s), "trial": trial, "affinity": affinity(U1, U2)})
            rows.append(row)
    aggs = _aggregate(rows, ("s",), METRIC_KEYS + ("affinity",))
    return ExperimentResult("intersection", cfg.to_dict(), rows, aggs)


def run_affinity_grid(cfg: ExperimentConfig) -> ExperimentResult:
    """Three subspaces of R^{2d} with controlled affinity, over density and angle."""
    p = cfg.resolved()
    d = p["d"]
    rows = []
    cell = 0
    for rho in p["rhos"]:
        for theta in p["thetas"]:
            bases = gen_three_subspace_grid(d, float(theta), p["alpha"])
            max_aff = max(affinity(bases[i], bases[j]) for i in range(3) for j in range(i + 1, 3))
            m = max(2, int(round(rho * d)))
            for trial in range(p["trials"]):
                ds = gen_semi_random(list(bases), [m] * 3, cfg.rng(cell, trial))
                row, _ = _ssc_row(ds, cfg, seed=trial)
                row.update({"rho": float(rho), "theta": float(theta), "trial": trial,
                            "normalized_max_affinity": max_aff / math.sqrt(d)})
                rows.append(row)
            cell += 1
    aggs = _aggregate(rows, ("rho", "theta"), METRIC_KEYS + ("normalized_max_affinity",))
    return ExperimentResult("affinity_grid", cfg.to_dict(), rows, aggs)


def run_dim_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """L random d-dimensional subspaces of R^n, 4d points each, over d."""
    p = cfg.resolved()
    rows, spectra = [], {}
    for cell, d in enumerate(p["dims"]):
        for trial in range(p["trials"]):
            ds = gen_fully_random(p["n"], int(d), p["L"], None, cfg.rng(cell, trial),
                                  points=p["points_factor"] * int(d))
            row, ev = _ssc_row(ds, cfg, seed=trial)
            row.update({"d": int(d), "trial": trial})
            rows.append(row)
            spectra[f"d={d},trial={trial}"] = ev
    aggs = _aggregate(rows, ("d",), METRIC_KEYS + ("L_hat",))
    return ExperimentResult("dim_sweep", cfg.to_dict(), rows, aggs, spectra=spectra)


def run_noise_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Fixed noiseless data per trial, perturbed at each noise level."""
    p = cfg.resolved()
    rows, spectra = [], {}
    for trial in range(p["trials"]):
        base = gen_fully_random(p["n"], p["d"], p["L"], None, cfg.rng(0, trial),
                                points=p["points_factor"] * p["d"])
        for cell, sigma in enumerate(p["sigmas"]):
            ds = add_noise(base, float(sigma), cfg.rng(cell + 1, trial))
            row, ev = _ssc_row(ds, cfg, seed=trial)
            row.update({"sigma": float(sigma), "trial": trial})
            rows.append(row)
            spectra[f"sigma={sigma},trial={trial}"] = ev
    aggs = _aggregate(rows, ("sigma",), METRIC_KEYS + ("L_hat",))
    return ExperimentResult("noise_sweep", cfg.to_dict(), rows, aggs, spectra=spectra)


def run_classical_compare(cfg: ExperimentConfig) -> ExperimentResult:
    """Eigen-gap estimates from the SSC affinity and from ``|V V^T|`` side by side."""
    p = cfg.resolved()
    rows, spectra = [], {}
    for cell, d in enumerate(p["dims"]):
        for trial in range(p["trials"]):
            base = gen_fully_random(p["n"], int(d), p["L"], None, cfg.rng(cell, trial),
                                    points=p["points_factor"] * int(d))
            for k, sigma in enumerate(p["sigmas"]):
                ds = add_noise(base, float(sigma), cfg.rng(cell, trial, k + 1))
                row, ev = _ssc_row(ds, cfg, seed=trial)
                cspec = normalized_laplacian(classical_affinity(ds.X, p["rank"]))
                row.update({"d": int(d), "sigma": float(sigma), "trial": trial,
                            "L_hat_classical": estimate_num_subspaces(cspec),
                            "L_hat_classical_skip_final_gap":
                                estimate_num_subspaces(cspec, skip_final_gap=True)})
                rows.append(row)
                key = f"d={d},sigma={sigma},trial={trial}"
                spectra["ssc:" + key] = ev
                spectra["classical:" + key] = np.sort(cspec.eigenvalues)
    aggs = _aggregate(rows, ("d", "sigma"), ("L_hat", "L_hat_classical", "clustering_error"))
    return ExperimentResult("classical_compare", cfg.to_dict(), rows, aggs, spectra=spectra)


def run_outlier_gap(cfg: ExperimentConfig) -> ExperimentResult:
    """``L = 2n/d`` subspaces with ``5d`` points each plus as many uniform outliers."""
    p = cfg.resolved()
    n, d = p["n"], p["d"]
    L = 2 * n // d
    rows, traces = [], {}
    for trial in range(p["trials"]):
        rng = cfg.rng(0, trial)
        inl = gen_fully_random(n, d, L, None, rng, points=p["points_factor"] * d)
        ds = with_outliers(inl, int(round(p["outlier_ratio"] * inl.N)), rng)
        coef = build_coefficient_matrix(ds.X, cfg.tols, threads=cfg.threads)
        is_out = ds.labels == 0
        conj = detect_outliers(coef.optvals, n, OutlierConfig())
        prov = detect_outliers(coef.optvals, n, OutlierConfig(PROVEN, t=p["t"]))
        inl_vals, out_vals = coef.optvals[~is_out], coef.optvals[is_out]
        rows.append({
            "trial": trial, "n": n, "d": d, "L": L, "N_inliers": int((~is_out).sum()),
            "N_outliers": int(is_out.sum()),
            "conjectured_threshold": conj.threshold_used, "proven_threshold": prov.threshold_used,
            "misclassified_conjectured": int(np.sum(conj.flags != is_out)),
            "misclassified_proven": int(np.sum(prov.flags != is_out)),
            "false_outliers_conjectured": int(np.sum(conj.flags & ~is_out)),
            "missed_outliers_conjectured": int(np.sum(~conj.flags & is_out)),
            "max_inlier_optval": float(inl_vals.max()),
            "min_outlier_optval": float(out_vals.min()) if out_vals.size else math.inf,
            "gap_holds": bool(out_vals.size and inl_vals.max() < out_vals.min()),
        })
        traces[f"trial={trial}"] = coef.optvals
    aggs = _aggregate(rows, ("n",), ("misclassified_conjectured", "misclassified_proven"))
    return ExperimentResult("outlier_gap", cfg.to_dict(), rows, aggs, traces=traces)


def run_bound_report(cfg: ExperimentConfig) -> ExperimentResult:
    """Tabulate the sufficient conditions for a scenario of random subspaces."""
    p = cfg.resolved()
    n, L, rho = p["n"], p["L"], float(p["rho"])
    c = DensityConstant(c_rho=p["c_rho"], rho0=p["rho0"])
    rows = []
    for cell, d in enumerate(p["dims"]):
        d = int(d)
        full = eval_fullrandom_bound(n, d, L, rho, beta=p["beta"], c=c)
        full_uncapped = eval_fullrandom_bound(n, d, L, rho, beta=p["beta"], c=c, cap_density=False)
        rng = cfg.rng(cell, 0)
        bases = [random_subspace(n, d, r) for r in rng.spawn(L)]
        aff = np.array([[affinity(a, b) for b in bases] for a in bases])
        m = math.floor(rho * d) + 1
        semi = eval_semirandom_bound(aff, [m] * L, [d] * L, p["t"], c=c)
        outl = eval_outlier_bounds(n, L * m, dims=[d] * L, rhos=[(m - 1) / d] * L, c=c)
        rows.append({
            "d": d, "d_max": full["d_max"], "d_max_uncapped": full_uncapped["d_max"],
            "fullrandom_satisfied": full["satisfied"], "fullrandom_prob_bound": full["prob_bound"],
            "semirandom_all_satisfied": semi["all_satisfied"],
            "semirandom_max_lhs": float(semi["lhs"].max()), "semirandom_rhs": float(semi["rhs"][0]),
            "semirandom_prob_bound": float(semi["prob_bound"]),
            "max_normalized_affinity": float((aff - np.diag(np.diag(aff))).max() / math.sqrt(d)),
            "proven_threshold": outl["proven_threshold"],
            "conjectured_threshold": outl["conjectured_threshold"],
            "outlier_lhs_2_11": outl["lhs_2_11"], "outlier_satisfied_2_11": outl["satisfied_2_11"],
        })
    return ExperimentResult("bound_report", cfg.to_dict(), rows, [])


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "intersection": run_intersection,
    "affinity_grid": run_affinity_grid,
    "dim_sweep": run_dim_sweep,
    "noise_sweep": run_noise_sweep,
    "classical_compare": run_classical_compare,
    "outlier_gap": run_outlier_gap,
    "bound_report": run_bound_report,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    start = time.perf_counter()
    result = RUNNERS[cfg.experiment](cfg)
    result.wall_clock = time.perf_counter() - start
    if cfg.out:
        write_result(result, cfg.out)
    return result


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), FLOAT_FMT)
    return v


def _write_table(path: Path, rows: list) -> None:
    if not rows:
        return
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([_cell(r[k]) for k in keys])


def _write_series(path: Path, series: dict) -> None:
    if not series:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "index", "value"])
        for key, vals in series.items():
            for i, v in enumerate(np.asarray(vals, dtype=float)):
                w.writerow([key, i, _cell(v)])


def write_result(result: ExperimentResult, out) -> Path:
    """Persist a result; everything but ``timing.json`` is seed-deterministic."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "result.json", {"experiment": result.experiment, "version": result.version,
                                     "config": result.config, "rows": result.rows,
                                     "aggregates": result.aggregates})
    _write_table(out / "rows.csv", result.rows)
    _write_table(out / "aggregates.csv", result.aggregates)
    _write_series(out / "spectra.csv", result.spectra)
    _write_series(out / "traces.csv", result.traces)
    write_json(out / "timing.json", {"wall_clock_seconds": result.wall_clock})
    return out
