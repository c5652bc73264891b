import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sscgeo.cli import main
from sscgeo.datagen import gen_fully_random, make_rng, with_outliers
from sscgeo.io import (read_dataset, read_labels, read_matrix_csv, read_triplets, to_jsonable,
                       write_dataset, write_labels, write_matrix_csv, write_triplets)


def test_matrix_roundtrip_is_exact(tmp_path):
    M = make_rng(0).standard_normal((4, 7))
    write_matrix_csv(tmp_path / "m.csv", M)
    assert read_matrix_csv(tmp_path / "m.csv").tobytes() == M.tobytes()


def test_triplets_and_labels(tmp_path):
    M = np.zeros((3, 4))
    M[0, 2] = 1 / 3
    M[2, 1] = -2.5
    write_triplets(tmp_path / "t.csv", M)
    assert np.array_equal(read_triplets(tmp_path / "t.csv"), M)
    write_labels(tmp_path / "l.csv", [0, 2, 1])
    assert read_labels(tmp_path / "l.csv").tolist() == [0, 2, 1]


def test_jsonable_infinity():
    assert to_jsonable({"a": np.array([1.0, math.inf]), "b": np.int64(3)}) == {"a": [1.0, "inf"], "b": 3}


def test_dataset_roundtrip(tmp_path):
    ds = with_outliers(gen_fully_random(10, 2, 2, 3.0, make_rng(1), seed=1), 3, make_rng(2))
    write_dataset(tmp_path, ds)
    back = read_dataset(tmp_path)
    assert back.X.tobytes() == ds.X.tobytes()
    assert back.labels.tolist() == ds.labels.tolist()
    assert all(np.array_equal(a, b) for a, b in zip(back.bases, ds.bases))
    side = json.loads((tmp_path / "data.json").read_text())
    assert side["seed"] == 1 and side["model"] == "fully_random"


def run_cli(*args):
    return main([str(a) for a in args])


def test_cli_gen_ssc_certify(tmp_path):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n": 12, "d": 3, "L": 2, "points": 4}))
    assert run_cli("gen", "--seed", 5, "--config", cfg, "--out", tmp_path / "ds") == 0
    first = (tmp_path / "ds" / "data.csv").read_bytes()
    assert run_cli("gen", "--seed", 5, "--config", cfg, "--out", tmp_path / "ds2") == 0
    assert (tmp_path / "ds2" / "data.csv").read_bytes() == first

    assert run_cli("ssc", tmp_path / "ds" / "data.csv", "--labels", tmp_path / "ds" / "data_labels.csv",
                   "--out", tmp_path / "ssc") == 0
    summary = json.loads((tmp_path / "ssc" / "summary.json").read_text())
    assert summary["metrics"]["feature_detection_error"] == 0.0
    assert summary["L_hat"] == 2

    assert run_cli("certify", tmp_path / "ds", "--out", tmp_path / "cert") == 0
    certs = json.loads((tmp_path / "cert" / "certificates.json").read_text())
    assert [c["label"] for c in certs] == [1, 2]


def test_cli_outliers(tmp_path):
    ds = with_outliers(gen_fully_random(20, 2, 2, None, make_rng(3), points=30), 10, make_rng(4))
    write_matrix_csv(tmp_path / "x.csv", ds.X)
    assert run_cli("outliers", tmp_path / "x.csv", "--out", tmp_path / "o") == 0
    rep = json.loads((tmp_path / "o" / "outliers.json").read_text())
    assert rep["flags"] == [bool(v) for v in ds.labels == 0]
    labels = read_labels(tmp_path / "o" / "labels.csv")
    assert np.all(labels[ds.labels == 0] == 0)
    assert run_cli("outliers", tmp_path / "x.csv", "--mode", "proven", "--t", 0.5,
                   "--out", tmp_path / "p") == 0


def test_cli_bounds_and_exp(tmp_path):
    cfg = tmp_path / "b.json"
    cfg.write_text(json.dumps({"kind": "fullrandom", "n": 100, "d": 2, "L": 1, "rho": 10}))
    assert run_cli("bounds", "--config", cfg, "--out", tmp_path / "b") == 0
    out = json.loads((tmp_path / "b" / "bounds.json").read_text())
    assert out["N"] == 21
    ecfg = tmp_path / "e.json"
    ecfg.write_text(json.dumps({"n": 20, "L": 2, "dims": [2]}))
    assert run_cli("exp", "dim_sweep", "--config", ecfg, "--out", tmp_path / "e") == 0
    assert (tmp_path / "e" / "result.json").exists()


def test_cli_exit_codes(tmp_path):
    assert run_cli("ssc", tmp_path / "missing.csv") == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("gen", "--config", bad) == 2
    bad.write_text(json.dumps({"model": "nope"}))
    assert run_cli("gen", "--config", bad, "--out", tmp_path) == 2
    write_matrix_csv(tmp_path / "x.csv", np.eye(4)[:, :2])
    assert run_cli("outliers", tmp_path / "x.csv", "--t", 2.0) == 2
    # a point outside the span of the others cannot be certified as a subspace member
    (tmp_path / "ds").mkdir()
    e = np.eye(3)
    write_matrix_csv(tmp_path / "ds" / "data.csv", e[:, :2])
    write_labels(tmp_path / "ds" / "data_labels.csv", [1, 1])
    write_matrix_csv(tmp_path / "ds" / "data_bases.csv", e[:, :1])
    (tmp_path / "ds" / "data.json").write_text(json.dumps({"basis_dims": [1]}))
    assert run_cli("certify", tmp_path / "ds") == 2
    with pytest.raises(SystemExit) as exc:
        run_cli("exp", "unknown")
    assert exc.value.code == 2


def test_cli_numerical_failure(tmp_path, monkeypatch):
    from sscgeo import cli
    from sscgeo.errors import NonConvergence

    def boom(*a, **k):
        raise NonConvergence("gap not certified")

    monkeypatch.setattr(cli, "ssc_pipeline", boom)
    write_matrix_csv(tmp_path / "x.csv", np.eye(3))
    assert run_cli("ssc", tmp_path / "x.csv") == 3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sscgeo", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
