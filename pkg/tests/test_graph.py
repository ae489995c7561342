import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixedscore.exceptions import MixedScoreError, ParseError
from mixedscore.graph import (adjacency, from_adjacency, giant_component,
                              giant_component_matrix, is_connected, load_edge_list)


def test_parse_simple():
    g = load_edge_list("1 2\n2 3")
    assert g.n == 3
    assert g.edges == {(0, 1), (1, 2)}
    assert g.labels == ("1", "2", "3")


def test_parse_dedup_and_self_loop():
    g = load_edge_list("a b\nb a\na a")
    assert g.n == 2 and g.edges == {(0, 1)}
    assert g.n_self_loops == 1 and g.n_duplicates == 1


def test_parse_commas_comments_and_stream():
    g = load_edge_list(io.StringIO("# header\n\nx,y\ny , z\n"))
    assert g.labels == ("x", "y", "z") and g.n_edges == 2


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as info:
        load_edge_list("1 2\n3\n")
    assert info.value.line == 2
    assert "line 2" in str(info.value)


def test_random_file_matches_set_construction():
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, 20, size=(100, 2))
    text = "\n".join(f"n{a} n{b}" for a, b in pairs)
    expected = {frozenset((a, b)) for a, b in pairs if a != b}
    g = load_edge_list(text)
    assert g.n_edges == len(expected)
    assert g.n_self_loops == int((pairs[:, 0] == pairs[:, 1]).sum())


def test_giant_component_cases():
    path = load_edge_list("0 1\n1 2\n2 3")
    gc, mapping = giant_component(path)
    assert gc == path and mapping.tolist() == [0, 1, 2, 3]

    two = load_edge_list("a b\nx y\nb c")
    gc, mapping = giant_component(two)
    assert gc.labels == ("a", "b", "c")
    assert mapping.tolist() == [0, 1, -1, -1, 2]


def test_adjacency_small():
    assert adjacency(load_edge_list("0 1")).tolist() == [[0, 1], [1, 0]]
    A = adjacency(load_edge_list("0 1\n1 2\n0 2"))
    assert np.array_equal(A, np.ones((3, 3)) - np.eye(3))


def test_adjacency_row_sums_are_degrees():
    rng = np.random.default_rng(1)
    M = np.triu(rng.random((30, 30)) < 0.2, 1)
    g = from_adjacency(M | M.T)
    deg = np.zeros(g.n, int)
    for i, j in g.edges:
        deg[i] += 1
        deg[j] += 1
    assert np.array_equal(adjacency(g).sum(axis=1), deg)
    assert np.array_equal(g.degrees(), deg)


def test_giant_component_of_empty_graph_fails():
    with pytest.raises(MixedScoreError):
        giant_component(load_edge_list(""))


def test_giant_component_matrix():
    A = adjacency(load_edge_list("0 1\n1 2\n3 4"))
    sub, keep = giant_component_matrix(A)
    assert keep.tolist() == [0, 1, 2] and is_connected(sub)
    assert not is_connected(A)


edge_lists = st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), max_size=60)
nonempty_edge_lists = st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=60)


@given(edge_lists)
def test_adjacency_symmetric_zero_diagonal(pairs):
    g = load_edge_list("\n".join(f"{a} {b}" for a, b in pairs))
    A = adjacency(g)
    assert np.array_equal(A, A.T) and not np.diag(A).any()
    assert set(np.unique(A)) <= {0.0, 1.0}


@given(nonempty_edge_lists)
def test_giant_component_idempotent(pairs):
    g = load_edge_list("\n".join(f"{a} {b}" for a, b in pairs))
    gc, _ = giant_component(g)
    gc2, mapping = giant_component(gc)
    assert gc2 == gc and mapping.tolist() == list(range(gc.n))


@given(edge_lists)
@settings(max_examples=50)
def test_serialize_round_trip(pairs):
    g = load_edge_list("\n".join(f"{a} {b}" for a, b in pairs))
    h = load_edge_list(g.to_edge_list())
    as_labels = lambda x: {frozenset((x.labels[i], x.labels[j])) for i, j in x.edges}
    assert as_labels(h) == as_labels(g)
