"""Leading eigenpairs of symmetric matrices with deterministic ordering/signs."""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-10
TIE_RTOL = 1e-12
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class EigenPairs:
    """K eigenpairs sorted by descending ``|value|``.

    ``vectors[:, 0]`` has positive entry sum; every other column has its
    largest-magnitude entry positive.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def K(self) -> int:
        return self.values.shape[0]

    def flip(self, columns) -> "EigenPairs":
        """Copy with the given columns negated (for invariance checks)."""
        vec = self.vectors.copy()
        vec[:, list(columns)] *= -1
        return EigenPairs(self.values.copy(), vec)

    def to_dict(self) -> dict:
        return {"values": self.values.tolist(), "vectors": self.vectors.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _orient(vec, first):
    if first:
        s = vec.sum()
        if s > 0:
            return vec
        if s < 0:
            return -vec
    j = int(np.argmax(np.abs(vec)))
    return vec if vec[j] >= 0 else -vec


def top_k_eigen(M, K) -> EigenPairs:
    """The ``K`` largest-magnitude eigenpairs of the symmetric matrix ``M``.

    Magnitude ties (within a relative ``1e-12``) put the positive value
    first, then order by the (oriented) eigenvector lexicographically.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be a square matrix")
    n = M.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"K={K} out of range for n={n}")
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > SYMMETRY_TOL * scale:
        raise ValueError("M is not symmetric")

    vals, vecs = np.linalg.eigh(M)
    mags = np.abs(vals)
    kth = np.sort(mags)[::-1][K - 1]
    cand = np.flatnonzero(mags >= kth - TIE_RTOL * kth)
    oriented = {j: _orient(vecs[:, j], first=False) for j in cand.tolist()}

    def cmp(a, b):
        ma, mb = abs(vals[a]), abs(vals[b])
        if abs(ma - mb) > TIE_RTOL * max(ma, mb):
            return -1 if ma > mb else 1
        if (vals[a] > 0) != (vals[b] > 0):
            return -1 if vals[a] > 0 else 1
        va, vb = oriented[a], oriented[b]
        diff = np.flatnonzero(va != vb)
        if diff.size == 0:
            return 0
        return -1 if va[diff[0]] < vb[diff[0]] else 1

    order = sorted(cand.tolist(), key=functools.cmp_to_key(cmp))[:K]

    values = vals[order].copy()
    vectors = np.column_stack(
        [_orient(vecs[:, j], first=(c == 0)) for c, j in enumerate(order)])
    return EigenPairs(values, vectors)


def check_leading_positivity(xi1, tol=ZERO_TOL) -> dict:
    """Report entries of the leading eigenvector that are not strictly positive."""
    xi1 = np.asarray(xi1)
    bad = np.flatnonzero(xi1 <= tol)
    return {"count": int(bad.size), "indices": bad.tolist()}
