"""File formats: dense matrix CSV, sparse triplets, labels and JSON sidecars.

All floats are written with 17 significant digits so that files round-trip
bit for bit.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .datagen import DataSet

__all__ = [
    "FLOAT_FMT",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_triplets",
    "read_triplets",
    "write_labels",
    "read_labels",
    "write_dataset",
    "read_dataset",
    "to_jsonable",
    "write_json",
]

FLOAT_FMT = ".17g"


def _fmt(v) -> str:
    return format(float(v), FLOAT_FMT)


def write_matrix_csv(path, M) -> None:
    """Dense matrix, one CSV row per matrix row, no header."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([_fmt(v) for v in row])


def read_matrix_csv(path) -> np.ndarray:
    M = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return M


def write_triplets(path, M, tol: float = 0.0) -> None:
    """Sparse ``row,col,value`` triplets of the entries with ``|value| > tol``."""
    M = np.asarray(M, dtype=float)
    rows, cols = np.nonzero(np.abs(M) > tol)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        w.writerow(["#shape", M.shape[0], M.shape[1]])
        for r, c in zip(rows, cols):
            w.writerow([int(r), int(c), _fmt(M[r, c])])


def read_triplets(path, shape: Optional[tuple] = None) -> np.ndarray:
    entries = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "row":
                continue
            if row[0] == "#shape":
                shape = (int(row[1]), int(row[2]))
                continue
            entries.append((int(row[0]), int(row[1]), float(row[2])))
    if shape is None:
        raise ValueError("triplet file carries no shape and none was given")
    M = np.zeros(shape)
    for r, c, v in entries:
        M[r, c] = v
    return M


def write_labels(path, labels) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"])
        for v in labels:
            w.writerow([int(v)])


def read_labels(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, dtype=int, ndmin=1)


def to_jsonable(obj):
    """Recursively convert numpy containers; infinities become the string "inf"."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_dataset(directory, ds: DataSet, stem: str = "data") -> dict:
    """Write ``<stem>.csv``, ``<stem>_labels.csv``, ``<stem>_bases.csv`` and ``<stem>.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"matrix": directory / f"{stem}.csv", "sidecar": directory / f"{stem}.json"}
    write_matrix_csv(paths["matrix"], ds.X)
    if ds.labels is not None:
        paths["labels"] = directory / f"{stem}_labels.csv"
        write_labels(paths["labels"], ds.labels)
    sidecar = {"seed": ds.seed, "model": ds.provenance.get("model"), "params": ds.provenance,
               "n": ds.n, "N": ds.N}
    if ds.bases is not None:
        paths["bases"] = directory / f"{stem}_bases.csv"
        write_matrix_csv(paths["bases"], np.concatenate(ds.bases, axis=1))
        sidecar["basis_dims"] = [int(U.shape[1]) for U in ds.bases]
    write_json(paths["sidecar"], sidecar)
    return {k: str(v) for k, v in paths.items()}


def read_dataset(directory, stem: str = "data") -> DataSet:
    directory = Path(directory)
    X = read_matrix_csv(directory / f"{stem}.csv")
    labels = None
    if (directory / f"{stem}_labels.csv").exists():
        labels = read_labels(directory / f"{stem}_labels.csv")
    sidecar = json.loads((directory / f"{stem}.json").read_text())
    bases = None
    if (directory / f"{stem}_bases.csv").exists():
        B = read_matrix_csv(directory / f"{stem}_bases.csv")
        dims = np.cumsum([0] + sidecar["basis_dims"])
        bases = [B[:, a:b] for a, b in zip(dims[:-1], dims[1:])]
    return DataSet(X=X, labels=labels, bases=bases, seed=sidecar.get("seed"),
                   provenance=sidecar.get("params", {}))
