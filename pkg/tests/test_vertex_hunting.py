import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mixedscore.dcmm import ExperimentConfig, omega
from mixedscore.exceptions import NoElbowError
from mixedscore.score import ideal_ratio_matrix
from mixedscore.vertex_hunting import (combinatorial_search, dist_to_simplex, hull_distances,
                                       is_degenerate, kmeans, kmeans_path, practical_L_path,
                                       select_L_practical, select_L_theory, standard_simplex,
                                       vertex_hunt)

from oracles import exhaustive_kmeans_sse, pgd_simplex_distance

TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_kmeans_trivial_cases():
    X = np.array([[0.0, 1.0], [2.0, 3.0]])
    res = kmeans(X, 2)
    assert res.sse == 0 and {tuple(c) for c in res.centers} == {(0, 1), (2, 3)}
    Y = np.random.default_rng(0).normal(size=(6, 2))
    assert kmeans(Y, 6).sse == pytest.approx(0, abs=1e-12)


def test_kmeans_eight_points_exhaustive():
    rng = np.random.default_rng(11)
    for _ in range(5):
        X = rng.normal(size=(8, 2))
        assert kmeans(X, 3).sse <= exhaustive_kmeans_sse(X, 3) + 1e-9


def test_kmeans_deterministic():
    X = np.random.default_rng(1).normal(size=(60, 2))
    a, b = kmeans(X, 4, seed=3), kmeans(X, 4, seed=3)
    assert np.array_equal(a.centers, b.centers) and a.sse == b.sse


def test_lloyd_sse_path_nonincreasing():
    X = np.random.default_rng(2).normal(size=(200, 2))
    res = kmeans(X, 5, restarts=5)
    path = np.array(res.sse_path)
    assert np.all(np.diff(path) <= 1e-12 * path[0])


def test_fewer_distinct_points_than_clusters():
    res = kmeans(np.zeros((10, 2)), 3)
    assert res.n_clusters == 1 and res.sse == 0


def test_dist_examples():
    assert dist_to_simplex([0.2, 0.2], TRIANGLE) == 0
    assert dist_to_simplex([2.0], [[0.0], [1.0]]) == pytest.approx(1.0)
    assert dist_to_simplex([1.0, 1.0], TRIANGLE) == pytest.approx(np.sqrt(0.5))
    assert all(dist_to_simplex(v, TRIANGLE) == 0 for v in TRIANGLE)


def test_dist_matches_projected_gradient():
    rng = np.random.default_rng(12)
    for K in (2, 3, 4, 5):
        Vs = [V for V in (rng.normal(size=(K, K - 1)) for _ in range(60)) if not is_degenerate(V)]
        Ps = rng.normal(size=(len(Vs), K - 1)) * 1.5
        ours = np.array([dist_to_simplex(p, V) for p, V in zip(Ps, Vs)])
        assert np.allclose(ours, pgd_simplex_distance(Ps, np.array(Vs), iters=5000), atol=1e-6)


def test_combinatorial_search_examples():
    idx, d = combinatorial_search(TRIANGLE, 3)
    assert idx == (0, 1, 2) and d == 0
    idx, d = combinatorial_search(np.vstack([TRIANGLE, TRIANGLE.mean(axis=0)]), 3)
    assert idx == (0, 1, 2) and d == 0


def test_combinatorial_search_matches_exhaustive():
    rng = np.random.default_rng(13)
    for _ in range(10):
        C = rng.normal(size=(7, 2))
        best = min((float(hull_distances(C, C[list(c)]).max()), c)
                   for c in itertools.combinations(range(7), 3))
        idx, d = combinatorial_search(C, 3)
        assert d == pytest.approx(best[0], abs=1e-12)
        others = [hull_distances(C, C[list(c)]).max() for c in itertools.combinations(range(7), 3)]
        assert d <= min(others) + 1e-12


def test_vertex_hunt_oracle_rows():
    params = ExperimentConfig.figure1().draw_params(0)
    R = ideal_ratio_matrix(omega(params), 3).values
    truth = R[[0, 100, 200]]
    s = vertex_hunt(R, 3, 7, restarts=20)
    V = s.vertices
    err = min(np.abs(V[list(p)] - truth).max() for p in itertools.permutations(range(3)))
    assert err <= 1e-8 and s.fallback is None


def test_vertex_hunt_fallback_identical_points():
    s = vertex_hunt(np.ones((20, 2)), 3, 4)
    assert s.fallback == "fewer-clusters"
    assert np.array_equal(s.vertices, standard_simplex(3))


def test_standard_simplex_shape():
    assert standard_simplex(3).tolist() == [[0, 0], [1, 0], [0, 1]]


def tight_clusters(rng, centers, per=20, spread=1e-6):
    return np.vstack([c + spread * rng.normal(size=(per, len(c))) for c in centers])


def test_theory_selector_tight_clusters():
    rng = np.random.default_rng(14)
    K = 3
    centers = np.vstack([TRIANGLE, [[0.3, 0.3], [1.0, 1.0]]])  # K + 2 clusters
    X = tight_clusters(rng, centers)
    assert select_L_theory(X, K, restarts=20) == K + 2


def test_theory_selector_errors():
    with pytest.raises(ValueError):
        select_L_theory(np.zeros((2, 1)), 2, n=2)
    X = np.random.default_rng(15).uniform(size=(200, 2))
    with pytest.raises(NoElbowError) as info:
        select_L_theory(X, 3, restarts=5)
    assert len(info.value.eps) > 0


def test_practical_selector_tie_takes_largest():
    rng = np.random.default_rng(16)
    X = tight_clusters(rng, TRIANGLE, per=10, spread=0.0)
    path = practical_L_path(X, 3, restarts=5)
    assert sorted(path.score) == list(range(4, 10))
    assert all(v == 0 for v in path.delta.values())
    assert path.L == 9


def test_practical_selector_needs_points():
    with pytest.raises(ValueError):
        select_L_practical(np.zeros((5, 2)), 3)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (40, 2), elements=st.floats(-5, 5, allow_subnormal=False)),
       st.integers(0, 2 ** 31))
def test_eps_nonincreasing(X, seed):
    path = kmeans_path(X, 8, seed=seed, restarts=3)
    eps = [path[L].sse for L in range(1, 9)]
    assert all(b <= a for a, b in zip(eps, eps[1:]))


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(-3, 3), st.floats(-3, 3), st.booleans())
def test_vertex_hunt_isometry_equivariant(angle, dx, dy, reflect):
    rng = np.random.default_rng(17)
    X = rng.dirichlet(np.ones(3), size=150) @ (TRIANGLE * 2) + rng.normal(scale=0.05, size=(150, 2))
    Q = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    if reflect:
        Q = Q @ np.diag([1.0, -1.0])
    shift = np.array([dx, dy])
    a = vertex_hunt(X, 3, 6, seed=1, restarts=10).vertices
    b = vertex_hunt(X @ Q.T + shift, 3, 6, seed=1, restarts=10).vertices
    mapped = a @ Q.T + shift
    err = min(np.abs(b[list(p)] - mapped).max() for p in itertools.permutations(range(3)))
    assert err < 1e-8
