"""Vertex hunting: locate the corners of a simplex hidden in a noisy cloud.

Two stages. Lloyd k-means summarizes the cloud by ``L`` local centers;
a combinatorial search then picks the ``K`` centers whose convex hull
leaves the remaining centers closest to it.

Every geometric quantity here is built from differences, dot products
and squared norms, so negating a coordinate axis of the input leaves all
decisions (and the returned vertices, up to that negation) bit-identical.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .exceptions import NoElbowError
from .seeding import make_rng

DEGENERATE_RTOL = 1e-8
BARY_TOL = 1e-10
FACE_RTOL = 1e-12
MAX_K = 8


@dataclass(frozen=True)
class Simplex:
    """``K`` vertices in ``R^(K-1)``.

    ``fallback`` is ``None`` when the vertices came from the search, or
    ``"fewer-clusters"`` / ``"degenerate"`` when the standard simplex was
    substituted. ``indices`` and ``d`` describe the chosen centers.
    """

    vertices: np.ndarray
    degenerate: bool = False
    fallback: str | None = None
    indices: tuple | None = None
    d: float | None = None

    @property
    def K(self) -> int:
        return self.vertices.shape[0]

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "degenerate": self.degenerate,
            "fallback": self.fallback,
            "indices": None if self.indices is None else list(self.indices),
            "d": self.d,
        }


def standard_simplex(K) -> np.ndarray:
    """Origin plus the ``K-1`` unit coordinate points of ``R^(K-1)``."""
    return np.vstack([np.zeros(K - 1), np.eye(K - 1)])


def is_degenerate(vertices) -> bool:
    """Gram determinant of the edge vectors from vertex 0, relative to scale."""
    V = np.asarray(vertices, dtype=float)
    E = V[1:] - V[0]
    if E.shape[0] == 0:
        return False
    if E.shape[0] > E.shape[1]:
        return True
    G = E @ E.T
    scale = float(np.max(np.diag(G))) ** E.shape[0]
    if scale == 0.0:
        return True
    return np.linalg.det(G) <= DEGENERATE_RTOL * scale


def make_simplex(vertices, **kw) -> Simplex:
    V = np.asarray(vertices, dtype=float)
    return Simplex(V, degenerate=is_degenerate(V), **kw)


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    sse: float
    n_clusters: int
    n_iter: int
    sse_path: tuple = field(default=(), repr=False)

    @property
    def L(self) -> int:
        return self.centers.shape[0]


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


@njit(cache=True)
def _kmeanspp(X, L, u):
    """k-means++ seeding driven by the pre-drawn uniforms ``u`` (length L)."""
    n, dim = X.shape
    C = np.empty((L, dim))
    j = min(int(u[0] * n), n - 1)
    C[0] = X[j]
    d2 = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(dim):
            t = X[i, k] - X[j, k]
            s += t * t
        d2[i] = s
    for c in range(1, L):
        total = 0.0
        for i in range(n):
            total += d2[i]
        if total <= 0.0:
            j = min(int(u[c] * n), n - 1)
        else:
            target = u[c] * total
            acc = 0.0
            j = n - 1
            for i in range(n):
                acc += d2[i]
                if acc > target:
                    j = i
                    break
        C[c] = X[j]
        for i in range(n):
            s = 0.0
            for k in range(dim):
                t = X[i, k] - X[j, k]
                s += t * t
            if s < d2[i]:
                d2[i] = s
    return C


@njit(cache=True)
def _assign(X, C, labels, resid):
    n, dim = X.shape
    L = C.shape[0]
    changed = False
    total = 0.0
    for i in range(n):
        best = np.inf
        arg = 0
        for c in range(L):
            s = 0.0
            for k in range(dim):
                t = X[i, k] - C[c, k]
                s += t * t
            if s < best:
                best = s
                arg = c
        if labels[i] != arg:
            changed = True
            labels[i] = arg
        resid[i] = best
        total += best
    return changed, total


@njit(cache=True)
def _update(X, C, labels, resid):
    """Repair empty clusters, then move each center to its cluster mean."""
    n, dim = X.shape
    L = C.shape[0]
    counts = np.zeros(L, np.int64)
    for i in range(n):
        counts[labels[i]] += 1
    for c in range(L):
        if counts[c] > 0:
            continue
        arg = -1
        best = -1.0
        for i in range(n):
            if counts[labels[i]] > 1 and resid[i] > best:
                best = resid[i]
                arg = i
        if arg < 0:
            break
        counts[labels[arg]] -= 1
        labels[arg] = c
        counts[c] += 1
        resid[arg] = 0.0
    sums = np.zeros((L, dim))
    for i in range(n):
        for k in range(dim):
            sums[labels[i], k] += X[i, k]
    for c in range(L):
        if counts[c] > 0:
            for k in range(dim):
                C[c, k] = sums[c, k] / counts[c]


@njit(cache=True)
def _sse(X, C, labels):
    n, dim = X.shape
    total = 0.0
    for i in range(n):
        for k in range(dim):
            t = X[i, k] - C[labels[i], k]
            total += t * t
    return total


@njit(cache=True)
def _lloyd(X, C0, max_iter, tol):
    """Lloyd iterations from ``C0`` until the assignment stops changing.

    Also stops after ``max_iter`` updates or once the relative SSE decrease
    falls to ``tol``; the returned assignment is always nearest-center.
    """
    n = X.shape[0]
    C = C0.copy()
    labels = np.full(n, -1, np.int64)
    resid = np.empty(n)
    _, prev = _assign(X, C, labels, resid)
    path = np.empty(max_iter)
    it = 0
    while it < max_iter:
        _update(X, C, labels, resid)
        path[it] = _sse(X, C, labels)
        it += 1
        changed, total = _assign(X, C, labels, resid)
        if not changed:
            break
        if prev - total <= tol * prev:
            break
        prev = total
    return C, labels, _sse(X, C, labels), it, path[:it]


def _count_clusters(C, labels):
    used = np.unique(labels)
    return len({tuple(row) for row in C[used]})


def kmeans(points, L, seed=0, restarts=100, cache=None, max_iter=300,
           tol=1e-10) -> KMeansResult:
    """Best-of-``restarts`` Lloyd k-means with k-means++ seeding.

    Parameters
    ----------
    points : array, shape (n, d)
    L : int
        Number of clusters.
    seed : int
        Restart ``r`` draws from a stream derived from ``(seed, L, r)``.
    restarts : int
        Number of k-means++ seeded runs.
    cache : dict, optional
        Maps ``L`` to previously returned results for the *same* points.
        When ``cache[L-1]`` exists an extra run starts from those centers
        plus the point farthest from them, which guarantees that the SSE
        is nonincreasing in ``L`` when ``L`` is visited in ascending order.
        The result is stored back as ``cache[L]``.

    Returns
    -------
    KMeansResult
        ``n_clusters`` counts distinct nonempty clusters; it is below ``L``
        when the cloud has fewer than ``L`` distinct points.
    """
    X = np.ascontiguousarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, d) array")
    if X.shape[1] == 0:
        raise ValueError("points must have dimension d >= 1")
    if L < 1:
        raise ValueError("L must be at least 1")
    if cache is not None and L in cache:
        return cache[L]

    inits = [_kmeanspp(X, L, make_rng(seed, L, r).random(L))
             for r in range(max(restarts, 1))]
    if cache is not None and (L - 1) in cache:
        prev = cache[L - 1].centers
        far = int(np.argmax(_sq_dists(X, prev).min(axis=1)))
        inits.append(np.vstack([prev, X[far]]))

    best = None
    for C0 in inits:
        C, labels, sse, n_iter, path = _lloyd(X, C0, max_iter, tol)
        if best is None or sse < best[2]:
            best = (C, labels, sse, n_iter, path)
    C, labels, sse, n_iter, path = best
    res = KMeansResult(C, labels, sse, _count_clusters(C, labels), n_iter,
                       tuple(path.tolist()))
    if cache is not None:
        cache[L] = res
    return res


def kmeans_path(points, L_max, seed=0, restarts=100, cache=None):
    """Run :func:`kmeans` for ``L = 1..L_max`` through one cache."""
    cache = {} if cache is None else cache
    for L in range(1, L_max + 1):
        kmeans(points, L, seed=seed, restarts=restarts, cache=cache)
    return cache


# ---------------------------------------------------------------------------
# point-to-hull distances
# ---------------------------------------------------------------------------

def _face_sq_dist(P, V):
    """Squared distance of each row of ``P`` to the affine hull of ``V``.

    Entries are ``inf`` where the projection falls outside the face
    (a negative barycentric coordinate) or the face is affinely degenerate.
    Full-dimensional faces report exact zeros for points inside.
    """
    s, d = V.shape
    D = P - V[0]
    if s == 1:
        return (D ** 2).sum(axis=1)
    E = V[1:] - V[0]
    G = E @ E.T
    diag = np.diag(G)
    if np.any(diag == 0.0) or np.linalg.det(G) <= FACE_RTOL * np.prod(diag):
        return np.full(P.shape[0], np.inf)
    c = np.linalg.solve(G, E @ D.T).T
    valid = (c >= -BARY_TOL).all(axis=1) & (c.sum(axis=1) <= 1.0 + BARY_TOL)
    if s - 1 == d:
        out = np.zeros(P.shape[0])
    else:
        out = ((D - c @ E) ** 2).sum(axis=1)
    return np.where(valid, out, np.inf)


def _subsets(items, max_size):
    for s in range(1, max_size + 1):
        yield from itertools.combinations(items, s)


def hull_distances(points, vertices) -> np.ndarray:
    """Euclidean distance from each point to the convex hull of ``vertices``.

    Enumerates every face (nonempty vertex subset), projects onto its
    affine hull and keeps projections with nonnegative barycentric
    coordinates; the answer is the smallest such distance.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    best = np.full(P.shape[0], np.inf)
    for face in _subsets(range(V.shape[0]), V.shape[0]):
        best = np.minimum(best, _face_sq_dist(P, V[list(face)]))
    return np.sqrt(best)


def dist_to_simplex(point, vertices) -> float:
    """Distance from one point to the convex hull of ``vertices`` (0 inside)."""
    return float(hull_distances(np.asarray(point, dtype=float)[None, :], vertices)[0])


def combinatorial_search(centers, K) -> tuple[tuple[int, ...], float]:
    """The ``K`` centers minimizing the largest center-to-hull distance.

    Returns the chosen (sorted) index tuple and its max distance. Exact ties
    go to the lexicographically smallest tuple.
    """
    M = np.asarray(centers, dtype=float)
    L = M.shape[0]
    if L < K:
        raise ValueError(f"need at least K={K} centers, got {L}")
    # each face's distances are shared by every K-subset containing it
    face_d = {f: _face_sq_dist(M, M[list(f)]) for f in _subsets(range(L), K)}
    local_faces = tuple(_subsets(range(K), K))
    best_idx, best_d = None, np.inf
    for combo in itertools.combinations(range(L), K):
        sq = np.full(L, np.inf)
        for local in local_faces:
            sq = np.minimum(sq, face_d[tuple(combo[i] for i in local)])
        d = math.sqrt(float(sq.max()))
        if d < best_d:
            best_idx, best_d = combo, d
    return best_idx, best_d


# ---------------------------------------------------------------------------
# vertex hunting and the choice of L
# ---------------------------------------------------------------------------

def _as_array(rhat):
    return np.asarray(getattr(rhat, "values", rhat), dtype=float)


def vertex_hunt(rhat, K, L, seed=0, restarts=100, cache=None) -> Simplex:
    """Estimate the ``K`` simplex vertices from the rows of ``rhat``.

    k-means results are always built through the ascending-``L`` cache
    (see :func:`kmeans`), so the answer for a given ``L`` does not depend on
    whether a cache is shared. Falls back to the standard simplex when
    k-means finds fewer than ``L`` clusters or when the selected vertices
    are degenerate.
    """
    X = _as_array(rhat)
    if L < K:
        raise ValueError(f"L={L} must be at least K={K}")
    km = kmeans_path(X, L, seed=seed, restarts=restarts, cache=cache)[L]
    if km.n_clusters < L:
        return make_simplex(standard_simplex(K), fallback="fewer-clusters")
    idx, d = combinatorial_search(km.centers, K)
    V = km.centers[list(idx)]
    if is_degenerate(V):
        return Simplex(standard_simplex(K), degenerate=False,
                       fallback="degenerate", indices=idx, d=d)
    return Simplex(V, degenerate=False, indices=idx, d=d)


def select_L_theory(rhat, K, n=None, seed=0, restarts=100, L_max=None,
                    cache=None) -> int:
    """Cluster count right after the first sharp drop in k-means SSE.

    Scans ``L = K+1, K+2, ...`` for the first ``L`` with
    ``eps_{L+1} < eps_L / log(log n)`` and returns ``L + 1``, the number of
    clusters at which the residual collapses (``L0 + K`` when there are
    ``L0`` tight mixed groups). ``eps_L`` is the k-means SSE with ``L``
    clusters, taken from the monotone cache. Raises :class:`NoElbowError`
    when no drop is found up to ``L_max`` (default ``5K``) clusters.
    """
    X = _as_array(rhat)
    n = X.shape[0] if n is None else n
    if n < 3:
        raise ValueError("n must be at least 3 so that log(log(n)) > 0")
    L_max = 5 * K if L_max is None else L_max
    ratio = math.log(math.log(n))
    cache = {} if cache is None else cache
    eps = {}
    for L in range(1, min(L_max, X.shape[0]) + 1):
        eps[L] = kmeans(X, L, seed=seed, restarts=restarts, cache=cache).sse
        if L - 1 >= K + 1 and eps[L] < eps[L - 1] / ratio:
            return L
    raise NoElbowError(f"no elbow found for L in [{K + 2}, {L_max}]", eps)


def _delta(V_new, V_old):
    K = V_new.shape[0]
    D = np.sqrt(((V_new[:, None, :] - V_old[None, :, :]) ** 2).sum(axis=2))
    perms = np.array(list(itertools.permutations(range(K))))
    # perm[k] is the new-vertex index matched to old vertex k
    return float(D[perms, np.arange(K)].max(axis=1).min())


@dataclass
class LPath:
    """Per-``L`` vertex hunting diagnostics behind the practical selector."""

    L: int
    simplices: dict
    d: dict
    delta: dict
    score: dict
    eps: dict


def practical_L_path(rhat, K, seed=0, restarts=100, cache=None) -> LPath:
    X = _as_array(rhat)
    if K < 2:
        raise ValueError("K must be at least 2")
    if K > MAX_K:
        raise ValueError(f"K={K} exceeds the supported maximum {MAX_K}")
    if X.shape[0] < 3 * K:
        raise ValueError(f"need at least 3K={3 * K} points, got {X.shape[0]}")
    cache = {} if cache is None else cache
    kmeans_path(X, 3 * K, seed=seed, restarts=restarts, cache=cache)
    simplices, d, delta, score = {}, {}, {}, {}
    for L in range(K, 3 * K + 1):
        s = vertex_hunt(X, K, L, seed=seed, restarts=restarts, cache=cache)
        simplices[L] = s
        # fallbacks have no search value; the standard simplex is accepted as is
        d[L] = s.d if s.fallback is None else 0.0
        if L > K:
            delta[L] = _delta(s.vertices, simplices[L - 1].vertices)
            score[L] = delta[L] / (1.0 + d[L])
    best = min(score.values())
    chosen = max(L for L, v in score.items() if v <= best + 1e-12)
    eps = {L: cache[L].sse for L in sorted(cache)}
    return LPath(chosen, simplices, d, delta, score, eps)


def select_L_practical(rhat, K, seed=0, restarts=100, cache=None) -> int:
    """``argmin_{K+1 <= L <= 3K} delta_L / (1 + d_L)``, largest ``L`` on ties.

    ``delta_L`` is the smallest, over vertex matchings, largest displacement
    between the simplices found with ``L`` and ``L-1`` centers.
    """
    return practical_L_path(rhat, K, seed=seed, restarts=restarts, cache=cache).L
