"""Degree-corrected mixed-membership (DCMM) model: parameters, Omega, sampling.

Edges are independent Bernoulli draws with
``P(A[i, j] = 1) = theta[i] * theta[j] * pi_i' P pi_j`` for ``i < j``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .exceptions import ValidationError
from .seeding import derive_seed

SCHEMA_VERSION = 1
PMF_TOL = 1e-12


@dataclass(frozen=True)
class DCMMParams:
    theta: np.ndarray
    pi: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "pi", np.atleast_2d(np.asarray(self.pi, dtype=float)))
        object.__setattr__(self, "P", np.atleast_2d(np.asarray(self.P, dtype=float)))

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    @property
    def K(self) -> int:
        return self.pi.shape[1]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "theta": self.theta.tolist(),
            "pi": self.pi.tolist(),
            "P": self.P.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DCMMParams":
        return cls(np.array(d["theta"]), np.array(d["pi"]), np.array(d["P"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DCMMParams":
        return cls.from_dict(json.loads(text))


def is_irreducible(P) -> bool:
    """True when the positive-support graph of ``P`` is strongly connected."""
    n_comp, _ = connected_components(np.asarray(P) > 0, directed=True,
                                     connection="strong")
    return n_comp == 1


def pure_node_counts(pi) -> np.ndarray:
    return (np.asarray(pi) == 1.0).sum(axis=0)


def validate(params: DCMMParams, check_omega=True) -> dict:
    """Check every DCMM invariant.

    Raises :class:`ValidationError` listing all violated conditions.
    Otherwise returns a report that also says whether each community has
    at least one pure node (needed for exact oracle recovery).
    """
    theta, pi, P = params.theta, params.pi, params.P
    n, K = pi.shape
    failures = []
    if theta.shape != (n,):
        failures.append(f"theta has shape {theta.shape}, expected ({n},)")
    if P.shape != (K, K):
        failures.append(f"P has shape {P.shape}, expected ({K}, {K})")
    if failures:
        raise ValidationError(failures)

    if not np.all(theta > 0):
        failures.append("theta must be strictly positive")
    if np.any(pi < 0):
        failures.append("membership rows must be nonnegative")
    if np.any(np.abs(pi.sum(axis=1) - 1.0) > PMF_TOL):
        failures.append("membership rows must sum to 1")
    if not np.array_equal(P, P.T):
        failures.append("P must be symmetric")
    if np.any(P < 0):
        failures.append("P must be nonnegative")
    if not np.all(np.diag(P) == 1.0):
        failures.append("unit diagonals violated")
    sv = np.linalg.svd(P, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        failures.append("P is singular")
    if not is_irreducible(P):
        failures.append("P is reducible")
    if check_omega and not failures:
        om = _omega(params)
        if om.max() > 1.0:
            failures.append(f"Omega has entries above 1 (max {om.max():.6g})")
    if failures:
        raise ValidationError(failures)

    counts = pure_node_counts(pi)
    return {
        "valid": True,
        "n": n,
        "K": K,
        "pure_nodes_per_community": counts.tolist(),
        "all_communities_have_pure_node": bool(np.all(counts > 0)),
    }


def _omega(params):
    M = params.pi @ params.P @ params.pi.T
    return params.theta[:, None] * M * params.theta[None, :]


def omega(params: DCMMParams) -> np.ndarray:
    """``Theta Pi P Pi' Theta`` including the diagonal."""
    om = _omega(params)
    om = (om + om.T) / 2
    if om.max() > 1.0:
        raise ValidationError(
            f"Omega has entries above 1 (max {om.max():.6g}); "
            "the model is misparameterized")
    return om


def sample_adjacency(params: DCMMParams, seed) -> np.ndarray:
    """Draw a symmetric 0/1 adjacency matrix from the model.

    Upper-triangle entries are drawn in row-major order from a PCG64
    stream seeded with ``seed``.
    """
    om = omega(params)
    n = om.shape[0]
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    hits = rng.random(iu.size) < om[iu, ju]
    A = np.zeros((n, n))
    A[iu[hits], ju[hits]] = 1.0
    A[ju[hits], iu[hits]] = 1.0
    return A


def offdiag_matrix(K, rho) -> np.ndarray:
    P = np.full((K, K), float(rho))
    np.fill_diagonal(P, 1.0)
    return P


def simulation_pmfs(x, K=3):
    if K != 3:
        raise ValueError("the four-group mixing design is defined for K=3")
    return [(x, x, 1 - 2 * x), (x, 1 - 2 * x, x), (1 - 2 * x, x, x),
            (1 / 3, 1 / 3, 1 / 3)]


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation setting.

    Pure nodes come first (``n0`` per community, community order), then the
    mixed groups in the order given. ``1/theta(i) ~ Unif[1, z]``.
    """

    n: int
    K: int
    n0: int
    mixed: tuple = field(default_factory=tuple)   # ((pmf, size), ...)
    rho: float = 0.1
    z: float = 5.0
    repetitions: int = 50
    seed: int = 0
    x: float | None = None

    @classmethod
    def simulation(cls, n0, x, rho, z, n=500, repetitions=50, seed=0):
        """Four mixed groups of sizes ``(n - 3 n0) / 4``.

        When that is not an integer the groups get the floor and the
        remainder goes to the last group.
        """
        K = 3
        if not 0 <= 3 * n0 <= n:
            raise ValidationError(f"n0={n0} incompatible with n={n}")
        m = n - K * n0
        sizes = [m // 4] * 4
        sizes[-1] += m - sum(sizes)
        mixed = tuple((tuple(p), s) for p, s in zip(simulation_pmfs(x), sizes))
        return cls(n=n, K=K, n0=n0, mixed=mixed, rho=rho, z=z,
                   repetitions=repetitions, seed=seed, x=x)

    @classmethod
    def figure1(cls, repetitions=50, seed=0):
        mixed = (((0.8, 0.2, 0.0), 50), ((0.0, 0.2, 0.8), 50),
                 ((0.2, 0.4, 0.4), 50), ((1 / 3, 1 / 3, 1 / 3), 50))
        return cls(n=500, K=3, n0=100, mixed=mixed, rho=0.3, z=5.0,
                   repetitions=repetitions, seed=seed)

    def replace(self, **changes) -> "ExperimentConfig":
        """Copy with changes; ``n0``/``x`` changes rebuild the mixed groups."""
        d = self.to_dict()
        d.update(changes)
        if self.x is not None and ({"n0", "x", "n"} & changes.keys()):
            d.pop("mixed")
        return ExperimentConfig.from_dict(d)

    def validate(self):
        failures = []
        if self.K < 2:
            failures.append("K must be at least 2")
        total = self.K * self.n0 + sum(s for _, s in self.mixed)
        if total != self.n:
            failures.append(f"{self.K}*n0 + mixed sizes = {total} != n = {self.n}")
        for pmf, s in self.mixed:
            p = np.asarray(pmf, dtype=float)
            if p.shape != (self.K,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
                failures.append(f"invalid mixed PMF {pmf}")
            if s < 0:
                failures.append("mixed group sizes must be nonnegative")
        if self.x is not None and not 0 < self.x < 0.5:
            failures.append("x must lie in (0, 1/2)")
        if self.z < 1:
            failures.append("z must be >= 1")
        if not 0 <= self.rho < 1:
            failures.append("rho must lie in [0, 1)")
        if self.repetitions < 0:
            failures.append("repetitions must be nonnegative")
        if failures:
            raise ValidationError(failures)

    def membership(self) -> np.ndarray:
        rows = [np.eye(self.K)[k] for k in range(self.K) for _ in range(self.n0)]
        for pmf, s in self.mixed:
            rows.extend([np.asarray(pmf, dtype=float)] * s)
        return np.array(rows).reshape(-1, self.K)

    def P(self) -> np.ndarray:
        return offdiag_matrix(self.K, self.rho)

    def draw_params(self, seed) -> DCMMParams:
        rng = np.random.default_rng(seed)
        theta = 1.0 / rng.uniform(1.0, self.z, size=self.n)
        return DCMMParams(theta, self.membership(), self.P())

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n, "K": self.K, "n0": self.n0,
            "mixed": [{"pmf": list(p), "size": s} for p, s in self.mixed],
            "rho": self.rho, "z": self.z, "x": self.x,
            "repetitions": self.repetitions, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d.pop("schema_version", None)
        if "mixed" not in d or d["mixed"] is None:
            if d.get("x") is None:
                raise ValidationError("config needs either 'mixed' groups or 'x'")
            return cls.simulation(
                n0=d["n0"], x=d["x"], rho=d.get("rho", 0.1), z=d.get("z", 5.0),
                n=d.get("n", 500), repetitions=d.get("repetitions", 50),
                seed=d.get("seed", 0))
        mixed = tuple((tuple(float(v) for v in g["pmf"]), int(g["size"]))
                      for g in d["mixed"])
        return cls(n=int(d["n"]), K=int(d["K"]), n0=int(d["n0"]), mixed=mixed,
                   rho=float(d.get("rho", 0.1)), z=float(d.get("z", 5.0)),
                   repetitions=int(d.get("repetitions", 50)),
                   seed=int(d.get("seed", 0)), x=d.get("x"))


def rep_seed(master_seed, rep) -> int:
    return derive_seed(master_seed, rep)


def build_experiment(config: ExperimentConfig):
    """Yield ``(rep, seed, params)`` for every repetition.

    ``seed`` is the per-repetition seed; theta is drawn from a stream
    derived from it, so repetition ``r`` is reproducible on its own.
    """
    config.validate()
    for rep in range(config.repetitions):
        s = rep_seed(config.seed, rep)
        yield rep, s, config.draw_params(derive_seed(s, 0))


def pg_eigenvalues(params: DCMMParams) -> np.ndarray:
    """``||theta||^2 * eig(P G)`` with ``G = ||theta||^-2 Pi' Theta^2 Pi``.

    These are the nonzero eigenvalues of Omega, sorted by descending
    magnitude. ``P G`` is similar to the symmetric ``G^1/2 P G^1/2``, so the
    spectrum is real.
    """
    t2 = float(params.theta @ params.theta)
    G = (params.pi * (params.theta ** 2)[:, None]).T @ params.pi / t2
    a = np.linalg.eigvals(params.P @ G).real
    a = a[np.argsort(-np.abs(a), kind="stable")]
    return t2 * a
