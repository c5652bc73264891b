"""Command line entry point.

Subcommands: ``gen``, ``ssc``, ``outliers``, ``certify``, ``exp`` and ``bounds``.
Exit status is 0 on success, 2 on a configuration error and 3 on a
numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (DensityConstant, eval_fullrandom_bound, eval_outlier_bounds,
                     eval_semirandom_bound, eval_semirandom_simplified)
from .clustering import normalize_columns, ssc_pipeline
from .datagen import (add_noise, gen_fully_random, gen_intersecting_pair, gen_semi_random,
                      gen_three_subspace_grid, make_rng, with_outliers)
from .errors import ConfigError, SSCError
from .experiments import EXPERIMENT_IDS, ExperimentConfig, run_experiment
from .geometry import check_geometric_condition
from .io import (read_dataset, read_labels, read_matrix_csv, write_dataset, write_json,
                 write_labels, write_matrix_csv, write_triplets)
from .outliers import CONJECTURED, PROVEN, OutlierConfig, outlier_pipeline
from .solver import DEFAULT_TOLERANCES

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

GEN_DEFAULTS = {"model": "fully_random", "n": 50, "d": 5, "L": 3, "rho": 4.0, "points": None,
                "s": 0, "theta": 0.0, "alpha": 0.5, "outliers": 0, "sigma": 0.0}


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _tols(args):
    if args.tol is None:
        return DEFAULT_TOLERANCES
    if not args.tol > 0:
        raise ConfigError("--tol must be positive")
    return dataclasses.replace(DEFAULT_TOLERANCES, gap_tol=args.tol)


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_input(path) -> np.ndarray:
    try:
        X = read_matrix_csv(path)
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    return normalize_columns(X)


def cmd_gen(args) -> int:
    p = dict(GEN_DEFAULTS)
    p.update(_load_config(args.config))
    unknown = set(p) - set(GEN_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown gen parameters: {sorted(unknown)}")
    rng = make_rng(args.seed)
    data_rng, out_rng, noise_rng = rng.spawn(3)
    model = p["model"]
    if model == "fully_random":
        ds = gen_fully_random(p["n"], p["d"], p["L"], p["rho"], data_rng, points=p["points"])
    elif model == "intersecting_pair":
        m = p["points"] or math.floor(p["rho"] * p["d"]) + 1
        ds = gen_semi_random(gen_intersecting_pair(p["n"], p["d"], p["s"], data_rng), [m, m],
                             data_rng, model=model)
    elif model == "three_subspace_grid":
        m = p["points"] or math.floor(p["rho"] * p["d"]) + 1
        bases = gen_three_subspace_grid(p["d"], p["theta"], p["alpha"])
        ds = gen_semi_random(list(bases), [m] * 3, data_rng, model=model)
    else:
        raise ConfigError(f"unknown model {model!r}")
    if p["outliers"]:
        ds = with_outliers(ds, int(p["outliers"]), out_rng)
    if p["sigma"]:
        ds = add_noise(ds, float(p["sigma"]), noise_rng)
    ds.seed = args.seed
    ds.provenance.update({k: p[k] for k in p})
    paths = write_dataset(_out_dir(args), ds)
    print(json.dumps(paths, indent=2))
    return EXIT_OK


def cmd_ssc(args) -> int:
    X = _read_input(args.input)
    truth = read_labels(args.labels) if args.labels else None
    res = ssc_pipeline(X, n_clusters=args.clusters, seed=args.seed, tols=_tols(args), truth=truth,
                       threads=args.threads)
    out = _out_dir(args)
    write_triplets(out / "coefficients.csv", res.Z)
    write_labels(out / "labels.csv", res.labels + 1)
    write_matrix_csv(out / "eigenvalues.csv", res.spectrum.eigenvalues[None, :])
    summary = {"L_hat": res.L_hat, "optvals": res.coefficients.optvals,
               "status": res.coefficients.status, **res.extra}
    if res.metrics is not None:
        summary["metrics"] = res.metrics.to_dict()
    write_json(out / "summary.json", summary)
    print(f"L_hat={res.L_hat}")
    return EXIT_OK


def cmd_outliers(args) -> int:
    X = _read_input(args.input)
    cfg = OutlierConfig(mode=args.mode, t=args.t)
    report, keep, res = outlier_pipeline(X, cfg, seed=args.seed, n_clusters=args.clusters,
                                         tols=_tols(args))
    out = _out_dir(args)
    write_json(out / "outliers.json", report.to_dict())
    labels = np.zeros(X.shape[1], dtype=int)
    if res is not None:
        labels[keep] = res.labels + 1
    write_labels(out / "labels.csv", labels)
    print(f"outliers={int(report.flags.sum())} threshold={report.threshold_used:.6g}")
    return EXIT_OK


def cmd_certify(args) -> int:
    ds = read_dataset(args.input, stem=args.stem)
    if ds.bases is None or ds.labels is None:
        raise ConfigError("certify needs a dataset with labels and bases")
    certs = check_geometric_condition(ds.X, ds.labels, ds.bases, tols=_tols(args),
                                      rng=make_rng(args.seed))
    write_json(_out_dir(args) / "certificates.json", [c.to_dict() for c in certs])
    for c in certs:
        print(f"subspace {c.label}: mu={c.mu:.6g} r={c.min_inradius:.6g} {c.verdict}")
    return EXIT_OK


def cmd_exp(args) -> int:
    params = _load_config(args.config)
    trials = params.pop("trials", None) if args.trials is None else args.trials
    if trials is not None:
        params["trials"] = trials
    cfg = ExperimentConfig(args.id, seed=args.seed, params=params, out=str(_out_dir(args)),
                           tols=_tols(args), threads=args.threads)
    res = run_experiment(cfg)
    print(f"{args.id}: {len(res.rows)} rows written to {cfg.out}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    p = _load_config(args.config)
    kind = p.pop("kind", "fullrandom")
    c = DensityConstant(**p.pop("density_constant", {}))
    try:
        if kind == "fullrandom":
            result = eval_fullrandom_bound(c=c, **p)
        elif kind == "semirandom":
            result = eval_semirandom_bound(c=c, **p)
        elif kind == "semirandom_simplified":
            result = eval_semirandom_simplified(c=c, **p)
        elif kind == "outlier":
            if args.t is not None:
                p["t"] = args.t
            result = eval_outlier_bounds(c=c, **p)
        else:
            raise ConfigError(f"unknown bound kind {kind!r}")
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    write_json(_out_dir(args) / "bounds.json", {"kind": kind, **result})
    print(json.dumps({k: v for k, v in result.items() if np.ndim(v) == 0}, default=float))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--config", default=None, help="JSON file of parameters")
    common.add_argument("--tol", type=float, default=None, help="duality gap tolerance")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--mode", choices=(CONJECTURED, PROVEN), default=CONJECTURED)
    common.add_argument("--t", type=float, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sscgeo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a dataset")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ssc", parents=[common], help="cluster a matrix file")
    p.add_argument("input", help="CSV matrix, n rows by N columns")
    p.add_argument("--labels", default=None, help="ground-truth labels CSV")
    p.add_argument("--clusters", type=int, default=None)
    p.set_defaults(func=cmd_ssc)

    p = sub.add_parser("outliers", parents=[common], help="detect outliers in a matrix file")
    p.add_argument("input")
    p.add_argument("--clusters", type=int, default=None)
    p.set_defaults(func=cmd_outliers)

    p = sub.add_parser("certify", parents=[common], help="geometric certificates of a dataset")
    p.add_argument("input", help="dataset directory written by gen")
    p.add_argument("--stem", default="data")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("exp", parents=[common], help="run a named experiment")
    p.add_argument("id", choices=EXPERIMENT_IDS)
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=cmd_exp)

    p = sub.add_parser("bounds", parents=[common], help="evaluate theorem conditions")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SSCError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
