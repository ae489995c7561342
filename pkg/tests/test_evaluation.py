import math

import numpy as np
import pytest

from mixedscore.dcmm import ExperimentConfig
from mixedscore.evaluation import (best_permutation, err_n_diagnostic, hausdorff, l2_error,
                                   max_aligned_error, run_experiment, run_grid)


def test_l2_examples():
    pi = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert l2_error(pi, pi) == 0
    assert l2_error(pi[:, ::-1], pi) == 0
    assert l2_error(np.array([[0.9, 0.1], [0.1, 0.9]]), pi) == pytest.approx(0.02)


def test_best_permutation_three():
    rng = np.random.default_rng(0)
    pi = rng.dirichlet(np.ones(3), size=30)
    perm = np.array([2, 0, 1])
    shuffled = np.empty_like(pi)
    shuffled[:, perm] = pi
    assert best_permutation(shuffled, pi).tolist() == perm.tolist()
    assert max_aligned_error(shuffled, pi) == 0


def test_err_n():
    assert err_n_diagnostic(np.ones(100)) == pytest.approx(math.log(100) / 10)
    c, n = 0.3, 50
    assert err_n_diagnostic(np.full(n, c)) == pytest.approx(math.log(n) / (math.sqrt(n) * c))
    theta = np.random.default_rng(1).uniform(0.2, 1, size=40)
    l1 = sum(abs(t) for t in theta)
    l2 = math.sqrt(sum(t * t for t in theta))
    ref = math.log(40) * math.sqrt(max(theta) * l1) / (math.sqrt(40) * min(theta) * l2)
    assert err_n_diagnostic(theta) == pytest.approx(ref)


def test_hausdorff():
    assert hausdorff([[0, 0]], [[3, 4]]) == 5
    assert hausdorff([[0, 0], [1, 0]], [[0, 0]]) == 1


def small_config(**kw):
    base = dict(n0=40, x=0.4, rho=0.1, z=2, n=150, repetitions=3, seed=1)
    base.update(kw)
    return ExperimentConfig.simulation(**base)


def test_zero_repetitions():
    rep = run_experiment(small_config(repetitions=0))
    assert rep.settings[0].n_ok == 0 and rep.settings[0].errors == []


def test_experiment_deterministic_and_shared_seeds():
    a = run_experiment(small_config(), L_modes=["fixed:4", "auto-practical"], restarts=5)
    b = run_experiment(small_config(), L_modes=["fixed:4", "auto-practical"], restarts=5)
    assert a.to_dict() == b.to_dict()
    assert a.settings[0].seeds == a.settings[1].seeds
    assert all(L == 4 for L in a.settings[0].L_used)
    assert "wall_ms" not in a.to_dict()["settings"][0]
    assert "wall_ms" in a.to_dict(timing=True)["settings"][0]


def test_grid_uses_common_seeds():
    rep = run_grid(small_config(), "rho", [0.1, 0.2], restarts=5)
    assert [s.setting for s in rep.settings] == [{"rho": 0.1}, {"rho": 0.2}]
    assert rep.settings[0].seeds == rep.settings[1].seeds
    rows = list(rep.curves_rows())
    assert len(rows) == 2 and rows[0]["setting"] == "rho=0.1"


def test_failures_recorded():
    rep = run_experiment(small_config(repetitions=2), L_modes=["auto-theory"], restarts=5)
    s = rep.settings[0]
    assert len(s.failures) + s.n_ok == 2
    for msg in s.failures.values():
        assert "NoElbowError" in msg
