import csv
import json

import numpy as np
import pytest

from mixedscore import cli
from mixedscore.dcmm import DCMMParams, offdiag_matrix

from oracles import random_dcmm


def run(*args):
    return cli.main([str(a) for a in args])


def test_bridge_node_is_mixed(tmp_path):
    a = [f"a{i}" for i in range(6)]
    b = [f"b{i}" for i in range(6)]
    lines = [f"{u} {v}" for grp in (a, b) for i, u in enumerate(grp) for v in grp[i + 1:]]
    lines += [f"bridge {a[0]}", f"bridge {a[1]}", f"bridge {b[0]}", f"bridge {b[1]}"]
    edges = tmp_path / "toy.txt"
    edges.write_text("\n".join(lines) + "\n")
    assert run("estimate", edges, "--k", 2, "--vertex-L", "fixed:2", "--restarts", 5,
               "--out", tmp_path / "out") == 0
    rows = {r["node"]: r for r in csv.DictReader(open(tmp_path / "out" / "memberships.csv"))}
    assert float(rows["bridge"]["purity"]) < 1
    assert float(rows["a3"]["purity"]) > float(rows["bridge"]["purity"])
    assert rows["a3"]["home_base"] in {"1", "2"}
    assert set(rows["a3"]) >= {"pi_1", "pi_2", "theta_hat"}


def test_missing_file(tmp_path):
    assert run("estimate", tmp_path / "nope.txt", "--k", 2, "--out", tmp_path / "o") == cli.EXIT_IO


def test_malformed_edge_list(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n1 2 3\n")
    assert run("estimate", bad, "--k", 2, "--out", tmp_path / "o") == cli.EXIT_PARSE


def test_bad_option_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        run("estimate", tmp_path / "x", "--k", 2, "--vertex-L", "nine", "--out", tmp_path)
    assert info.value.code == cli.EXIT_USAGE


def test_simulate_figure1_and_determinism(tmp_path):
    for d in ("a", "b"):
        assert run("simulate", "--preset", "figure1", "--seed", 3, "--out", tmp_path / d) == 0
    for name in ("edges.txt", "truth.csv", "params.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    truth = np.loadtxt(tmp_path / "a" / "truth.csv", delimiter=",", skiprows=1)
    assert truth.shape == (500, 5)
    assert len(np.unique(truth[:, 2:], axis=0)) == 7


def test_simulate_pure_only(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 30, "K": 3, "n0": 10, "mixed": [], "rho": 0.2, "z": 1}))
    assert run("simulate", "--config", cfg, "--out", tmp_path / "s") == 0
    truth = np.loadtxt(tmp_path / "s" / "truth.csv", delimiter=",", skiprows=1)
    assert np.all(truth[:, 1] == 1) and np.all(truth[:, 2:].max(axis=1) == 1)


def test_oracle_command(tmp_path, capsys):
    params = random_dcmm(np.random.default_rng(0), 120, 3)
    f = tmp_path / "p.json"
    f.write_text(params.to_json())
    assert run("oracle", f) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["max_deviation"] <= 1e-8 and out["eigen_identity_residual"] <= 1e-8

    pure = DCMMParams(np.ones(9), np.eye(3)[np.arange(9) % 3], offdiag_matrix(3, 0.2))
    f.write_text(pure.to_json())
    assert run("oracle", f) == 0
    assert json.loads(capsys.readouterr().out)["max_deviation"] <= 1e-12


def test_oracle_without_pure_nodes(tmp_path, capsys):
    rng = np.random.default_rng(1)
    pi = rng.dirichlet(np.ones(3), size=40)
    pi[:5] = [1, 0, 0]
    pi[5:10] = [0, 1, 0]
    f = tmp_path / "p.json"
    f.write_text(DCMMParams(np.full(40, 0.5), pi, offdiag_matrix(3, 0.2)).to_json())
    assert run("oracle", f) == cli.EXIT_PIPELINE
    err = capsys.readouterr().err
    assert "warning" in err and "pure node" in err


def test_oracle_invalid_params(tmp_path):
    f = tmp_path / "p.json"
    P = offdiag_matrix(2, 0.2)
    P[0, 0] = 0.5
    f.write_text(DCMMParams(np.ones(4), np.eye(2)[[0, 1, 0, 1]], P).to_json())
    assert run("oracle", f) == cli.EXIT_VALIDATION


def test_experiment_smoke(tmp_path):
    cfg = tmp_path / "e.json"
    cfg.write_text(json.dumps({"config": {"n0": 40, "x": 0.4, "rho": 0.1, "z": 2, "n": 150,
                                          "repetitions": 1}, "vertex_L": ["fixed:4"],
                               "restarts": 5}))
    assert run("experiment", cfg, "--out", tmp_path / "x") == 0
    lines = (tmp_path / "x" / "curves.csv").read_text().splitlines()
    assert len(lines) == 2
    report = json.loads((tmp_path / "x" / "report.json").read_text())
    assert report["schema_version"] == 1
    manifest = json.loads((tmp_path / "x" / "manifest.json").read_text())
    assert manifest["command"] == "experiment" and len(manifest["inputs"]["config"]["sha256"]) == 64
