"""Membership reconstruction and the Mixed-SCORE pipelines.

``mixed_score`` estimates memberships from an adjacency matrix;
``ideal_mixed_score`` runs the same steps on the noiseless signal matrix
and recovers the true memberships exactly (up to column order).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateHullError, DisconnectedGraphError, MixedScoreError, RadicandError
from .graph import is_connected
from .score import RatioMatrix, default_threshold, oracle_ratios, ratio_matrix
from .spectral import EigenPairs, check_leading_positivity, top_k_eigen
from .vertex_hunting import (Simplex, combinatorial_search, hull_distances,
                             is_degenerate, practical_L_path, select_L_theory,
                             vertex_hunt)

COND_MAX = 1e12
DEDUP_TOL = 1e-9
MAX_SUBSETS = 20000


@dataclass(frozen=True)
class EstimateResult:
    pi_hat: np.ndarray
    simplex: Simplex
    eigen: EigenPairs
    rhat: RatioMatrix
    b1_hat: np.ndarray
    w_hat: np.ndarray
    theta_hat: np.ndarray
    L_used: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def purity(self) -> np.ndarray:
        return self.pi_hat.max(axis=1)

    @property
    def home_base(self) -> np.ndarray:
        return self.pi_hat.argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "K": int(self.pi_hat.shape[1]),
            "n": int(self.pi_hat.shape[0]),
            "L_used": self.L_used,
            "threshold": self.rhat.threshold,
            "eigenvalues": self.eigen.values.tolist(),
            "simplex": self.simplex.to_dict(),
            "b1_hat": self.b1_hat.tolist(),
            "pi_hat": self.pi_hat.tolist(),
            "w_hat": self.w_hat.tolist(),
            "theta_hat": self.theta_hat.tolist(),
            "diagnostics": self.diagnostics,
        }


def estimate_b1(values, simplex) -> np.ndarray:
    """``b1(k) = [lambda_1 + v_k' diag(lambda_2..lambda_K) v_k]^(-1/2)``."""
    lam = np.asarray(values, dtype=float)
    V = np.asarray(getattr(simplex, "vertices", simplex), dtype=float)
    rad = lam[0] + (V ** 2 * lam[1:][None, :]).sum(axis=1)
    for k, r in enumerate(rad):
        if not r > 0:
            raise RadicandError(k, float(r))
    return rad ** -0.5


def _system(simplex):
    V = np.asarray(getattr(simplex, "vertices", simplex), dtype=float)
    return np.vstack([np.ones(V.shape[0]), V.T])


def barycentric_rows(R, simplex) -> tuple[np.ndarray, bool]:
    """Barycentric weights of every row of ``R``; see :func:`barycentric`."""
    R = np.atleast_2d(np.asarray(getattr(R, "values", R), dtype=float))
    M = _system(simplex)
    rhs = np.vstack([np.ones(R.shape[0]), R.T])
    if np.linalg.cond(M) > COND_MAX:
        # constrained least squares: minimize ||V w - r|| with sum(w) = 1
        K = M.shape[1]
        V = M[1:]
        kkt = np.zeros((K + 1, K + 1))
        kkt[:K, :K] = V.T @ V
        kkt[:K, K] = kkt[K, :K] = 1.0
        b = np.vstack([V.T @ R.T, np.ones((1, R.shape[0]))])
        sol = np.linalg.lstsq(kkt, b, rcond=None)[0]
        return sol[:K].T, True
    return np.linalg.solve(M, rhs).T, False


def barycentric(r, simplex) -> np.ndarray:
    """Weights ``w`` with ``sum_k w(k) v_k = r`` and ``sum(w) = 1``.

    Entries may be negative when ``r`` lies outside the simplex.
    """
    W, _ = barycentric_rows(np.asarray(r, dtype=float)[None, :], simplex)
    return W[0]


def reconstruct_rows(W, b1) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`reconstruct_pi`; returns PMFs and the degenerate mask."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    b1 = np.asarray(b1, dtype=float)
    star = np.maximum(0.0, W / b1[None, :])
    norm = star.sum(axis=1)
    degenerate = norm <= 0
    K = W.shape[1]
    pi = np.where(degenerate[:, None], 1.0 / K,
                  star / np.where(degenerate, 1.0, norm)[:, None])
    return pi, degenerate


def reconstruct_pi(w, b1) -> np.ndarray:
    """Clip ``w / b1`` at zero and normalize to a PMF (uniform if all zero)."""
    pi, _ = reconstruct_rows(np.asarray(w)[None, :], b1)
    return pi[0]


def estimate_theta(xi1, w_hat, b1_hat) -> np.ndarray:
    """``theta(i) = xi1(i) * sum_k w(i, k) / b1(k)``."""
    W = np.atleast_2d(np.asarray(w_hat, dtype=float))
    return np.asarray(xi1, dtype=float) * (W / np.asarray(b1_hat)[None, :]).sum(axis=1)


def purity_and_home_base(pi) -> tuple[float, int]:
    """Largest entry of a PMF and its (0-based, first on ties) index."""
    pi = np.asarray(pi)
    k = int(np.argmax(pi))
    return float(pi[k]), k


def parse_vertex_L(spec):
    """``"auto-practical"``, ``"auto-theory"``, ``"fixed:<int>"`` or an int."""
    if isinstance(spec, (int, np.integer)):
        return int(spec)
    if spec in ("auto-practical", "auto-theory"):
        return spec
    if isinstance(spec, str) and spec.startswith("fixed:"):
        return int(spec.split(":", 1)[1])
    raise ValueError(f"invalid vertex-L specification {spec!r}")


def parse_threshold(spec):
    """``"sqrt-log"``, ``"log"`` or ``"fixed:<value>"`` -> ``(mode, T)``."""
    if spec in ("sqrt-log", "log"):
        return spec, None
    if isinstance(spec, str) and spec.startswith("fixed:"):
        T = float(spec.split(":", 1)[1])
        if not T > 0:
            raise ValueError("fixed threshold must be positive")
        return "fixed", T
    raise ValueError(f"invalid threshold mode {spec!r}")


def _resolve_threshold(n, T, threshold_mode):
    if T is not None:
        return float(T)
    return default_threshold(n, threshold_mode)


def mixed_score(A, K, T=None, threshold_mode="sqrt-log", L="auto-practical",
                seed=0, restarts=100) -> EstimateResult:
    """Estimate mixed memberships from a connected adjacency matrix.

    Parameters
    ----------
    A : array, shape (n, n)
        Symmetric 0/1 adjacency matrix of a connected graph.
    K : int
        Number of communities (at least 2).
    T : float, optional
        Ratio clipping threshold; overrides ``threshold_mode``.
    threshold_mode : {"sqrt-log", "log"}
        ``T = sqrt(log n)`` or ``T = log n``.
    L : int or {"auto-practical", "auto-theory"}
        Number of k-means centers for vertex hunting, or a selector.
    seed, restarts : int
        k-means seeding.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    A = np.asarray(A, dtype=float)
    if not is_connected(A):
        raise DisconnectedGraphError(
            "graph is not connected; run giant_component first")
    eig = top_k_eigen(A, K)
    return mixed_score_from_eigen(eig, K, T=_resolve_threshold(A.shape[0], T, threshold_mode),
                                  L=L, seed=seed, restarts=restarts)


def mixed_score_from_eigen(eig, K, T, L="auto-practical", seed=0,
                           restarts=100, cache=None) -> EstimateResult:
    """Ratio, vertex hunting and reconstruction steps from given eigenpairs."""
    n = eig.vectors.shape[0]
    rhat = ratio_matrix(eig, T)
    cache = {} if cache is None else cache
    diag = {
        "n_clipped": rhat.n_clipped,
        "n_zero_denominator": rhat.n_zero_denominator,
        "leading_nonpositive": check_leading_positivity(eig.vectors[:, 0])["count"],
    }

    if L == "auto-practical":
        path = practical_L_path(rhat, K, seed=seed, restarts=restarts, cache=cache)
        L_used = path.L
        simplex = path.simplices[L_used]
        diag["L_path"] = {
            "d": {str(k): v for k, v in path.d.items()},
            "delta": {str(k): v for k, v in path.delta.items()},
            "score": {str(k): v for k, v in path.score.items()},
            "eps": {str(k): v for k, v in path.eps.items()},
            "fallbacks": {str(k): s.fallback for k, s in path.simplices.items()
                          if s.fallback is not None},
        }
    else:
        L = parse_vertex_L(L)
        if L == "auto-theory":
            L_used = select_L_theory(rhat, K, n=n, seed=seed, restarts=restarts,
                                     cache=cache)
        else:
            L_used = int(L)
        simplex = vertex_hunt(rhat, K, L_used, seed=seed, restarts=restarts,
                              cache=cache)
    diag["simplex_fallback"] = simplex.fallback

    b1 = estimate_b1(eig.values, simplex)
    W, lstsq = barycentric_rows(rhat.values, simplex)
    pi, degenerate = reconstruct_rows(W, b1)
    diag["barycentric_lstsq_fallback"] = lstsq
    diag["n_negative_weights_clipped"] = int(np.count_nonzero(W < 0))
    diag["n_degenerate_rows"] = int(degenerate.sum())
    theta = estimate_theta(eig.vectors[:, 0], W, b1)
    return EstimateResult(pi, simplex, eig, rhat, b1, W, theta, L_used, diag)


def _distinct_rows(R, tol=DEDUP_TOL):
    reps = []
    for row in R:
        if reps:
            arr = np.array(reps)
            if (np.abs(arr - row).max(axis=1) <= tol).any():
                continue
        reps.append(row)
    return np.array(reps)


def _spa(Y, K):
    """Successive projection: indices of the K rows spanning the cone of Y."""
    Y = Y.copy()
    picked = []
    for _ in range(K):
        j = int(np.argmax((Y ** 2).sum(axis=1)))
        picked.append(j)
        u = Y[j] / np.linalg.norm(Y[j])
        Y -= np.outer(Y @ u, u)
    return tuple(sorted(picked))


def oracle_vertices(R, K) -> Simplex:
    """Exact hull vertices of a noiseless ratio cloud.

    The distinct rows are searched combinatorially; when that is too large
    a candidate set is preselected by successive projection. Either way the
    selected simplex must contain every row, otherwise the cloud is not a
    ``K``-simplex with all corners present.
    """
    reps = _distinct_rows(np.asarray(getattr(R, "values", R), dtype=float))
    if reps.shape[0] < K:
        raise DegenerateHullError(
            f"only {reps.shape[0]} distinct ratio rows for K={K}")
    if math.comb(reps.shape[0], K) <= MAX_SUBSETS:
        idx, _ = combinatorial_search(reps, K)
    else:
        idx = _spa(np.hstack([np.ones((reps.shape[0], 1)), reps]), K)
    V = reps[list(idx)]
    d = float(hull_distances(reps, V).max())
    scale = max(1.0, float(np.abs(reps).max()))
    if d > 1e-7 * scale or is_degenerate(V):
        raise DegenerateHullError(
            "ratio rows do not form a K-simplex with all vertices present "
            f"(max distance outside {d:.3g}); is there a pure node in every "
            "community?")
    return Simplex(V, indices=idx, d=d)


def ideal_mixed_score(omega, K, return_details=False):
    """Exact membership recovery from the signal matrix ``Omega``.

    Returns the ``n x K`` membership matrix (columns in an arbitrary order),
    or ``(Pi, details)`` with the eigenpairs, simplex, b1, weights and
    theta when ``return_details`` is set.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    omega = np.asarray(omega, dtype=float)
    eig = top_k_eigen(omega, K)
    recon = eig.vectors @ np.diag(eig.values) @ eig.vectors.T
    scale = np.linalg.norm(omega)
    if (np.linalg.norm(omega - recon) > 1e-8 * scale
            or abs(eig.values[-1]) <= 1e-10 * abs(eig.values[0])):
        raise MixedScoreError(f"Omega is not of rank K={K} within tolerance")
    R = oracle_ratios(eig)
    simplex = oracle_vertices(R, K)
    b1 = estimate_b1(eig.values, simplex)
    W, _ = barycentric_rows(R.values, simplex)
    pi, _ = reconstruct_rows(W, b1)
    if not return_details:
        return pi
    theta = estimate_theta(eig.vectors[:, 0], W, b1)
    return pi, {"eigen": eig, "ratios": R, "simplex": simplex, "b1": b1,
                "w": W, "theta": theta}
