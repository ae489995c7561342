"""Undirected simple graphs: edge-list parsing, giant component, adjacency."""
from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import MixedScoreError, ParseError

_SEP = re.compile(r"[,\s]+")


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph.

    Nodes are dense indices ``0..n-1``; ``labels[i]`` is the original
    identifier of node ``i``. Edges are stored as ``(i, j)`` with ``i < j``.
    """

    labels: tuple[str, ...]
    edges: frozenset[tuple[int, int]]
    n_self_loops: int = 0
    n_duplicates: int = 0
    _edge_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("node labels must be unique")
        n = len(self.labels)
        for i, j in self.edges:
            if not (0 <= i < j < n):
                raise ValueError(f"invalid edge ({i}, {j}) for n={n}")
        arr = np.array(sorted(self.edges), dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "_edge_array", arr)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array, sorted lexicographically."""
        return self._edge_array.copy()

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self._edge_array.ravel(), 1)
        return deg

    def summary(self) -> dict:
        return {
            "n": self.n,
            "n_edges": self.n_edges,
            "dropped_self_loops": self.n_self_loops,
            "dropped_duplicates": self.n_duplicates,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_edge_list(self) -> str:
        """Serialize as one ``label label`` line per edge."""
        out = io.StringIO()
        for i, j in self._edge_array:
            out.write(f"{self.labels[i]} {self.labels[j]}\n")
        return out.getvalue()


def from_adjacency(A, labels=None) -> Graph:
    """Build a :class:`Graph` from a symmetric 0/1 matrix (diagonal ignored)."""
    A = np.asarray(A)
    n = A.shape[0]
    if labels is None:
        labels = [str(i) for i in range(n)]
    iu, ju = np.nonzero(np.triu(A, k=1))
    edges = frozenset(zip(iu.tolist(), ju.tolist()))
    return Graph(tuple(labels), edges)


def load_edge_list(source, comment="#") -> Graph:
    """Parse an edge list.

    Parameters
    ----------
    source : str or file-like
        Text (or an open text stream) holding one edge per line, the two
        node tokens separated by whitespace and/or a comma. Lines starting
        with ``comment`` and blank lines are skipped.
    comment : str
        Comment prefix.

    Returns
    -------
    Graph
        Nodes are indexed in order of first appearance. Duplicate edges are
        collapsed and self-loops dropped; both are counted on the result.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source

    index: dict[str, int] = {}
    labels: list[str] = []
    edges: set[tuple[int, int]] = set()
    n_loops = n_dups = 0

    def node(tok):
        if tok not in index:
            index[tok] = len(labels)
            labels.append(tok)
        return index[tok]

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(comment):
            continue
        tokens = [t for t in _SEP.split(line) if t]
        if len(tokens) != 2:
            raise ParseError(
                f"expected 2 node tokens, found {len(tokens)}: {line!r}",
                line=lineno)
        a, b = tokens
        if a == b:
            node(a)
            n_loops += 1
            continue
        i, j = node(a), node(b)
        e = (i, j) if i < j else (j, i)
        if e in edges:
            n_dups += 1
        else:
            edges.add(e)

    return Graph(tuple(labels), frozenset(edges), n_loops, n_dups)


def adjacency(g: Graph) -> np.ndarray:
    """Dense symmetric 0/1 adjacency matrix (float64) with zero diagonal."""
    A = np.zeros((g.n, g.n))
    e = g.edge_array()
    A[e[:, 0], e[:, 1]] = 1.0
    A[e[:, 1], e[:, 0]] = 1.0
    return A


def component_labels(g: Graph) -> np.ndarray:
    e = g.edge_array()
    m = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(g.n, g.n))
    _, comp = connected_components(m, directed=False)
    return comp


def _pick_giant(comp):
    sizes = np.bincount(comp)
    first = np.array([np.argmax(comp == c) for c in range(len(sizes))])
    best = min(range(len(sizes)), key=lambda c: (-sizes[c], first[c]))
    return np.flatnonzero(comp == best)


def giant_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Largest connected component of ``g``.

    Ties between equally large components go to the one containing the
    smallest node index. Returns the subgraph and an old->new index map
    (``-1`` for nodes outside the component). Node order is preserved.
    """
    if g.n == 0:
        raise MixedScoreError("giant component of an empty graph")
    keep = _pick_giant(component_labels(g))
    mapping = np.full(g.n, -1, dtype=np.int64)
    mapping[keep] = np.arange(len(keep))
    edges = frozenset(
        (int(mapping[i]), int(mapping[j])) for i, j in g.edges
        if mapping[i] >= 0)
    sub = Graph(tuple(g.labels[i] for i in keep), edges,
                g.n_self_loops, g.n_duplicates)
    return sub, mapping


def is_connected(A) -> bool:
    A = np.asarray(A)
    if A.shape[0] == 0:
        return False
    n_comp, _ = connected_components(coo_matrix(A != 0), directed=False)
    return n_comp == 1


def giant_component_matrix(A) -> tuple[np.ndarray, np.ndarray]:
    """Giant component of a dense adjacency matrix: ``(A_sub, kept_indices)``."""
    A = np.asarray(A)
    _, comp = connected_components(coo_matrix(A != 0), directed=False)
    keep = _pick_giant(comp)
    return A[np.ix_(keep, keep)], keep
