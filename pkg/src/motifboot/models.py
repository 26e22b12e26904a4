"""Random graph models used for validation.

* stochastic block model with ``F = s_n * S``
* latent-variable graphon with ``h(u, v) = min(rho_n * w(u, v), 1)``
* the preferential-attachment graphon ``w = c (1-u)^-1/2 (1-v)^-1/2``, c = 1/4

``sbm_moment`` gives the exact normalised moment of a pattern under a block
model, the population value a normalised count estimates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import Graph
from .motif import MotifPattern

MAX_LABELINGS = 1 << 22


@dataclass(frozen=True)
class SbmSpec:
    """Block probabilities ``pi``, symmetric shape matrix ``S`` and scale ``s_n``."""

    pi: tuple
    S: tuple
    s_n: float = 1.0

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        S = np.asarray(self.S, dtype=float)
        if pi.ndim != 1 or S.shape != (pi.size, pi.size):
            raise ValueError("S must be K x K for K blocks")
        if np.any(pi < 0) or not math.isclose(pi.sum(), 1.0, rel_tol=1e-9):
            raise ValueError("pi must be a probability vector")
        if not np.allclose(S, S.T):
            raise ValueError("S must be symmetric")
        F = self.s_n * S
        if np.any(F < 0) or np.any(F > 1):
            raise ValueError("edge probabilities s_n * S must lie in [0, 1]")
        object.__setattr__(self, "pi", tuple(pi.tolist()))
        object.__setattr__(self, "S", tuple(map(tuple, S.tolist())))

    @property
    def F(self) -> np.ndarray:
        return self.s_n * np.asarray(self.S)

    @property
    def rho(self) -> float:
        """Expected edge density ``pi^T F pi``."""
        pi = np.asarray(self.pi)
        return float(pi @ self.F @ pi)

    def to_dict(self) -> dict:
        return {"model": "sbm", "pi": list(self.pi), "S": [list(r) for r in self.S], "s_n": self.s_n}


def reference_sbm(n: int, nu: float = 0.5, S=((0.4, 0.45), (0.45, 0.7)), pi=(0.5, 0.5)) -> SbmSpec:
    """Two-block design with ``s_n = 5 nu sqrt(n) / n``.

    The off-diagonal shape entry defaults to 0.45, midway between 0.4 and
    0.5, so that ``S`` is symmetric.
    """
    return SbmSpec(tuple(pi), tuple(map(tuple, S)), 5.0 * nu * math.sqrt(n) / n)


def highschool_sbm() -> SbmSpec:
    """Two-block fit with ``P11 = 0``, ``P12 = 0.0058``, ``P22 = 0.000025``."""
    return SbmSpec((0.497, 0.503), ((0.0, 0.0058), (0.0058, 0.000025)), 1.0)


def _pair_from_index(idx: np.ndarray):
    # idx -> (i, j) with i < j in colex order: idx = j(j-1)/2 + i
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * idx)) / 2.0).astype(np.int64)
    j -= (j * (j - 1) // 2 > idx)
    j += ((j + 1) * j // 2 <= idx)
    i = idx - j * (j - 1) // 2
    return i, j


def _bernoulli_pairs(total: int, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``range(total)`` kept independently with probability ``prob``."""
    if total == 0 or prob <= 0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1:
        return np.arange(total, dtype=np.int64)
    k = rng.binomial(total, prob)
    return np.sort(rng.choice(total, size=k, replace=False)).astype(np.int64)


def sample_sbm(n: int, spec: SbmSpec, rng=None, return_labels: bool = False):
    """Draw a block model graph; block labels come back when asked for."""
    rng = np.random.default_rng(rng)
    K = len(spec.pi)
    labels = rng.choice(K, size=n, p=np.asarray(spec.pi))
    members = [np.flatnonzero(labels == a) for a in range(K)]
    F = spec.F
    parts = []
    for a in range(K):
        ma = members[a]
        idx = _bernoulli_pairs(ma.size * (ma.size - 1) // 2, F[a, a], rng)
        i, j = _pair_from_index(idx)
        parts.append(np.column_stack([ma[i], ma[j]]))
        for b in range(a + 1, K):
            mb = members[b]
            idx = _bernoulli_pairs(ma.size * mb.size, F[a, b], rng)
            parts.append(np.column_stack([ma[idx // max(mb.size, 1)], mb[idx % max(mb.size, 1)]]))
    g = Graph.from_edges(n, np.concatenate(parts) if parts else np.empty((0, 2)))
    return (g, labels) if return_labels else g


@dataclass(frozen=True)
class GraphonSpec:
    """``w`` must be symmetric and vectorised; ``h = min(rho_n * w, 1)``."""

    w: Callable
    rho_n: float
    name: str = "graphon"

    def __post_init__(self):
        if not 0 < self.rho_n <= 1:
            raise ValueError("rho_n must lie in (0, 1]")

    def h(self, u, v) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.rho_n * np.asarray(self.w(u, v), dtype=float)
        bad = ~np.isfinite(val)
        if bad.any():
            # blow-ups on the boundary saturate; anything else is a bad w
            if np.isnan(val[bad]).any():
                raise ValueError("graphon evaluated to nan")
            val[bad] = 1.0
        return np.minimum(val, 1.0)

    def to_dict(self) -> dict:
        return {"model": self.name, "rho_n": self.rho_n}


def pfa_graphon(rho_n: float) -> GraphonSpec:
    """Preferential-attachment graphon, normalised to integrate to one."""
    return GraphonSpec(lambda u, v: 0.25 / np.sqrt((1.0 - u) * (1.0 - v)), rho_n, "pfa")


def constant_graphon(rho_n: float) -> GraphonSpec:
    return GraphonSpec(lambda u, v: np.ones(np.broadcast(u, v).shape), rho_n, "constant")


def sample_graphon(n: int, spec: GraphonSpec, rng=None, return_latent: bool = False, chunk: int = 1 << 22):
    """Draw ``xi`` uniform and each edge with probability ``h(xi_i, xi_j)``.

    Costs O(n^2) evaluations of ``w``, done in row blocks.
    """
    rng = np.random.default_rng(rng)
    xi = rng.random(n)
    parts = []
    rows = max(1, chunk // max(n, 1))
    for lo in range(0, n, rows):
        hi = min(n, lo + rows)
        i = np.arange(lo, hi)
        P = spec.h(xi[i, None], xi[None, :])
        U = rng.random(P.shape)
        ii, jj = np.nonzero((U < P) & (np.arange(n)[None, :] > i[:, None]))
        parts.append(np.column_stack([ii + lo, jj]))
    g = Graph.from_edges(n, np.concatenate(parts) if parts else np.empty((0, 2)))
    return (g, xi) if return_latent else g


def sbm_moment(r: MotifPattern, spec: SbmSpec) -> float:
    """Exact ``rho^-e * E 1(R ⊆ G)`` for one placement under the block model."""
    K = len(spec.pi)
    if K ** r.p > MAX_LABELINGS:
        raise ValueError(f"{K}^{r.p} block labelings exceeds the limit {MAX_LABELINGS}")
    pi = np.asarray(spec.pi)
    F = spec.F
    rho = spec.rho
    if rho == 0:
        raise ValueError("block model has zero edge density")
    lab = np.array(list(itertools.product(range(K), repeat=r.p)), dtype=np.int64).reshape(-1, r.p)
    term = np.prod(pi[lab], axis=1)
    for a, b in r.edges:
        term = term * F[lab[:, a], lab[:, b]]
    return float(term.sum() / rho ** r.e)
