"""Entry-wise eigenvector ratios (SCORE normalization)."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import MixedScoreError
from .spectral import EigenPairs, top_k_eigen

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class RatioMatrix:
    """``n x (K-1)`` ratio matrix; ``threshold`` is None for the oracle ``R``."""

    values: np.ndarray
    threshold: float | None = None
    n_clipped: int = 0
    n_zero_denominator: int = 0

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, labels=None) -> str:
        n, d = self.values.shape
        if labels is None:
            labels = [str(i) for i in range(n)]
        out = io.StringIO()
        out.write(",".join(["node"] + [f"r{k + 1}" for k in range(d)]) + "\n")
        for lab, row in zip(labels, self.values):
            out.write(",".join([str(lab)] + [f"{v:.9f}" for v in row]) + "\n")
        return out.getvalue()


def default_threshold(n, mode="sqrt-log") -> float:
    """``sqrt(log n)`` (``mode='sqrt-log'``) or ``log n`` (``mode='log'``)."""
    if mode == "sqrt-log":
        return math.sqrt(math.log(n))
    if mode == "log":
        return math.log(n)
    raise ValueError(f"unknown threshold mode {mode!r}")


def ratio_matrix(eig: EigenPairs, T: float) -> RatioMatrix:
    """Clipped ratios ``sign(xi_{k+1}/xi_1) * min(|xi_{k+1}/xi_1|, T)``.

    A (near) zero denominator gives ``sign(xi_{k+1}) * T``, or 0 when the
    numerator is (near) zero as well.
    """
    if eig.K < 2:
        raise ValueError("ratio matrix needs K >= 2")
    if not T > 0:
        raise ValueError("threshold T must be positive")
    xi = eig.vectors
    num, den = xi[:, 1:], xi[:, :1]
    small = np.abs(den) < ZERO_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small, 0.0, num / np.where(small, 1.0, den))
    clipped = np.sign(ratio) * np.minimum(np.abs(ratio), T)
    n_clipped = int(np.count_nonzero(np.abs(ratio) > T))

    deg = np.broadcast_to(small, num.shape)
    nz = deg & (np.abs(num) >= ZERO_TOL)
    clipped = np.where(nz, np.sign(num) * T, clipped)
    clipped = np.where(deg & ~nz, 0.0, clipped)
    return RatioMatrix(clipped, float(T), n_clipped + int(nz.sum()),
                       int(small.sum()))


def oracle_ratios(eig: EigenPairs) -> RatioMatrix:
    xi1 = eig.vectors[:, 0]
    if np.any(xi1 <= 0):
        raise MixedScoreError(
            "leading eigenvector of Omega has nonpositive entries; "
            "Omega is not a valid DCMM signal matrix")
    return RatioMatrix(eig.vectors[:, 1:] / xi1[:, None])


def ideal_ratio_matrix(omega, K) -> RatioMatrix:
    """Unclipped ratios ``xi_{k+1}(i) / xi_1(i)`` from the eigenpairs of Omega."""
    if K < 2:
        raise ValueError("ratio matrix needs K >= 2")
    return oracle_ratios(top_k_eigen(omega, K))
