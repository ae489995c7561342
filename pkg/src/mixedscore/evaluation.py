"""Scoring against ground truth and repeated simulation experiments."""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dcmm import ExperimentConfig, build_experiment, sample_adjacency
from .exceptions import MixedScoreError
from .graph import giant_component_matrix
from .membership import mixed_score_from_eigen, parse_threshold, parse_vertex_L
from .score import default_threshold
from .seeding import derive_seed
from .spectral import top_k_eigen

SCHEMA_VERSION = 1
MAX_K = 8


def _perms(K):
    if K > MAX_K:
        raise ValueError(f"K={K} exceeds the supported maximum {MAX_K}")
    return np.array(list(itertools.permutations(range(K))))


def best_permutation(pi_hat, pi_true) -> np.ndarray:
    """Column order of ``pi_hat`` minimizing the mean squared row error."""
    pi_hat, pi_true = np.asarray(pi_hat, float), np.asarray(pi_true, float)
    if pi_hat.shape != pi_true.shape:
        raise ValueError(f"shape mismatch {pi_hat.shape} vs {pi_true.shape}")
    K = pi_true.shape[1]
    # cost[a, b]: squared error of estimated column a against true column b
    cost = ((pi_hat[:, :, None] - pi_true[:, None, :]) ** 2).sum(axis=0)
    perms = _perms(K)
    totals = cost[perms, np.arange(K)].sum(axis=1)
    return perms[int(np.argmin(totals))]


def l2_error(pi_hat, pi_true) -> float:
    """``min over column permutations of (1/n) sum_i ||pi_hat_i - pi_i||^2``."""
    pi_hat, pi_true = np.asarray(pi_hat, float), np.asarray(pi_true, float)
    perm = best_permutation(pi_hat, pi_true)
    return float(((pi_hat[:, perm] - pi_true) ** 2).sum(axis=1).mean())


def max_aligned_error(pi_hat, pi_true) -> float:
    """Smallest, over column permutations, largest entrywise deviation."""
    pi_hat, pi_true = np.asarray(pi_hat, float), np.asarray(pi_true, float)
    if pi_hat.shape != pi_true.shape:
        raise ValueError(f"shape mismatch {pi_hat.shape} vs {pi_true.shape}")
    return float(min(np.abs(pi_hat[:, p] - pi_true).max()
                     for p in _perms(pi_true.shape[1])))


def err_n_diagnostic(theta) -> float:
    """``log(n) sqrt(theta_max ||theta||_1) / (sqrt(n) theta_min ||theta||)``."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    return float(math.log(n) * math.sqrt(theta.max() * np.abs(theta).sum())
                 / (math.sqrt(n) * theta.min() * np.linalg.norm(theta)))


def hausdorff(X, Y) -> float:
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    D = np.sqrt(((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2))
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def align_vertices(vertices, eig_true, eig_hat) -> np.ndarray:
    """Express oracle simplex vertices in the frame of estimated eigenvectors.

    Eigenvectors ``2..K`` of the data are only determined up to a rotation
    of the oracle ones when eigenvalues are close; the best orthogonal map
    between the two bases (polar factor of ``Xi' Xi_hat``) carries the
    oracle vertices into the coordinates used by the estimate.
    """
    Q = eig_true.vectors[:, 1:].T @ eig_hat.vectors[:, 1:]
    U, _, Vt = np.linalg.svd(Q)
    return np.asarray(vertices) @ (U @ Vt)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass
class SettingResult:
    setting: dict
    L_mode: str
    seeds: list
    errors: list
    L_used: list
    wall_ms: list
    failures: dict = field(default_factory=dict)

    @property
    def ok_errors(self) -> np.ndarray:
        return np.array([e for e in self.errors if e is not None], dtype=float)

    @property
    def n_ok(self) -> int:
        return int(self.ok_errors.size)

    @property
    def mean(self) -> float:
        e = self.ok_errors
        return float(e.mean()) if e.size else float("nan")

    @property
    def sd(self) -> float:
        e = self.ok_errors
        return float(e.std(ddof=1)) if e.size > 1 else 0.0 if e.size else float("nan")

    @property
    def se(self) -> float:
        return self.sd / math.sqrt(self.n_ok) if self.n_ok else float("nan")

    def L_histogram(self) -> dict:
        hist = {}
        for L in self.L_used:
            if L is not None:
                hist[str(L)] = hist.get(str(L), 0) + 1
        return dict(sorted(hist.items(), key=lambda kv: int(kv[0])))

    def to_dict(self, timing=False) -> dict:
        d = {
            "setting": self.setting,
            "L_mode": self.L_mode,
            "repetitions": len(self.seeds),
            "n_ok": self.n_ok,
            "n_failed": len(self.failures),
            "mean_error": None if self.n_ok == 0 else self.mean,
            "sd_error": None if self.n_ok == 0 else self.sd,
            "seeds": list(self.seeds),
            "errors": self.errors,
            "L_used": self.L_used,
            "L_histogram": self.L_histogram(),
            "failures": {str(k): v for k, v in self.failures.items()},
        }
        if timing:
            w = np.array(self.wall_ms, dtype=float)
            d["wall_ms"] = {"total": float(w.sum()) if w.size else 0.0,
                            "mean": float(w.mean()) if w.size else 0.0,
                            "max": float(w.max()) if w.size else 0.0}
        return d


@dataclass
class ExperimentReport:
    config: dict
    options: dict
    settings: list = field(default_factory=list)

    def to_dict(self, timing=False) -> dict:
        """JSON-ready report. Wall-clock numbers only when ``timing`` is set,
        so the default serialization is reproducible byte for byte."""
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "options": self.options,
            "settings": [s.to_dict(timing=timing) for s in self.settings],
        }

    def curves_rows(self):
        for s in self.settings:
            key = ";".join(f"{k}={v}" for k, v in s.setting.items())
            yield {"setting": key, "L_mode": s.L_mode, "mean": s.mean,
                   "sd": s.sd, "n_ok": s.n_ok, "n_failed": len(s.failures)}

    def rep_rows(self):
        for s in self.settings:
            key = ";".join(f"{k}={v}" for k, v in s.setting.items())
            for rep, seed in enumerate(s.seeds):
                yield {"setting": key, "L_mode": s.L_mode, "rep": rep,
                       "seed": seed, "error": s.errors[rep],
                       "L_used": s.L_used[rep], "wall_ms": s.wall_ms[rep]}


def _run_rep(task):
    """One repetition: sample, take the giant component, estimate every L mode."""
    rep, seed, params, K, threshold, L_modes, restarts = task
    t0 = time.perf_counter()
    out = []
    try:
        A = sample_adjacency(params, derive_seed(seed, 1))
        A, keep = giant_component_matrix(A)
        if A.shape[0] < 3 * K:
            raise MixedScoreError(f"giant component too small ({A.shape[0]} nodes)")
        mode, T = parse_threshold(threshold)
        T = default_threshold(A.shape[0], mode) if T is None else T
        eig = top_k_eigen(A, K)
        truth = params.pi[keep]
    except MixedScoreError as exc:
        ms = (time.perf_counter() - t0) * 1e3
        return [(None, None, ms, f"{type(exc).__name__}: {exc}")] * len(L_modes)
    cache = {}
    for L in L_modes:
        t1 = time.perf_counter()
        err = L_used = msg = None
        try:
            res = mixed_score_from_eigen(eig, K, T, L=parse_vertex_L(L),
                                         seed=derive_seed(seed, 2),
                                         restarts=restarts, cache=cache)
            err, L_used = l2_error(res.pi_hat, truth), res.L_used
        except MixedScoreError as exc:
            msg = f"{type(exc).__name__}: {exc}"
        out.append((err, L_used, (time.perf_counter() - t1) * 1e3, msg))
    return out


def run_experiment(config: ExperimentConfig, L_modes=("auto-practical",),
                   threshold="sqrt-log", restarts=100, workers=1,
                   setting=None) -> ExperimentReport:
    """Repeat sample -> giant component -> Mixed-SCORE -> error.

    Each repetition uses seeds derived from ``(config.seed, rep)``; all
    ``L_modes`` are evaluated on the same sampled network. Failures are
    recorded per repetition and excluded from the means. Results do not
    depend on ``workers``.
    """
    config.validate()
    L_modes = [str(m) if not isinstance(m, str) else m for m in L_modes]
    tasks = [(rep, seed, params, config.K, threshold, L_modes, restarts)
             for rep, seed, params in build_experiment(config)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_run_rep, tasks))
    else:
        outs = [_run_rep(t) for t in tasks]

    setting = dict(setting or {})
    report = ExperimentReport(config.to_dict(),
                              {"L_modes": L_modes, "threshold": threshold,
                               "restarts": restarts})
    seeds = [t[1] for t in tasks]
    for m, mode in enumerate(L_modes):
        sr = SettingResult(setting, mode, seeds, [], [], [])
        for rep, out in enumerate(outs):
            err, L_used, ms, msg = out[m]
            sr.errors.append(err)
            sr.L_used.append(L_used)
            sr.wall_ms.append(ms)
            if msg is not None:
                sr.failures[rep] = msg
        report.settings.append(sr)
    return report


def run_grid(config: ExperimentConfig, parameter, values, **kw) -> ExperimentReport:
    """:func:`run_experiment` for each value of one config parameter."""
    merged = None
    for v in values:
        rep = run_experiment(config.replace(**{parameter: v}),
                             setting={parameter: v}, **kw)
        if merged is None:
            merged = rep
            merged.config = config.to_dict()
            merged.options["grid"] = {"parameter": parameter, "values": list(values)}
        else:
            merged.settings.extend(rep.settings)
    if merged is None:
        merged = ExperimentReport(config.to_dict(), {"grid": {"parameter": parameter, "values": []}})
    return merged
