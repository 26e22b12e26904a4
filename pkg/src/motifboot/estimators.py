"""Count statistics and their bootstrap estimates.

The count of a pattern R in G is ``P = N(R, G) / M(R, n)`` where ``N`` is the
number of (not necessarily induced) copies of R in G and ``M`` the number of
copies in the complete graph. The normalised count is ``T = rho^-e * P`` with
``rho = 2|E| / (n(n-1))``.

Two resampling schemes are provided. The uniform scheme recounts on the
subgraph induced by ``m`` random vertices. The subgraph scheme runs RAND-ESU
and reweights each sampled leaf by the inverse of its inclusion probability.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .esu import SamplingPlan, count_leaves
from .graph import Graph, induced_subgraph
from .motif import MotifPattern, triangle, vee

log = logging.getLogger(__name__)

MIN_SAMPLED_LEAVES = 10


class DegenerateDensity(ValueError):
    """Raised when a statistic needs ``rho_hat > 0`` and the graph has no edges."""


@dataclass(frozen=True)
class BootstrapConfig:
    """Resampling scheme: ``uniform`` (needs ``m``) or ``subgraph`` (needs ``q``)."""

    scheme: str
    B: int = 1
    seed: int = 0
    m: int | None = None
    q: tuple | None = None

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if self.scheme == "uniform":
            if self.m is None or self.q is not None:
                raise ValueError("uniform scheme takes m and no q")
            if self.m < 2:
                raise ValueError("m must be at least 2")
        elif self.scheme == "subgraph":
            if self.q is None or self.m is not None:
                raise ValueError("subgraph scheme takes q and no m")
            object.__setattr__(self, "q", tuple(float(x) for x in self.q))
            if not all(0.0 < x <= 1.0 for x in self.q):
                raise ValueError("retention probabilities must lie in (0, 1]")
        else:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @classmethod
    def uniform(cls, m: int, B: int = 1, seed: int = 0):
        return cls("uniform", B, seed, m=m)

    @classmethod
    def subgraph(cls, q: Sequence[float], B: int = 1, seed: int = 0):
        return cls("subgraph", B, seed, q=tuple(q))

    def q_for(self, p: int) -> tuple:
        """Retention vector of length ``p``: truncated, or padded with its last entry."""
        q = self.q
        return tuple(q[:p]) if len(q) >= p else tuple(q) + (q[-1],) * (p - len(q))

    def describe(self) -> dict:
        d = {"scheme": self.scheme, "B": self.B, "seed": self.seed}
        if self.scheme == "uniform":
            d["m"] = self.m
        else:
            d["q"] = list(self.q)
        return d


@dataclass
class CountEstimate:
    """A count statistic with enough provenance to reproduce it.

    ``value`` is on the proportion scale, ``normalized`` is
    ``rho_hat ** -e * value`` (``nan`` if ``rho_hat`` is 0).
    ``iterates`` holds the per-iterate values of a bootstrap estimate.
    """

    motif: MotifPattern
    value: float
    normalized: float
    n: int
    rho_hat: float
    scheme: dict = field(default_factory=lambda: {"scheme": "exact"})
    iterates: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "motif": self.motif.name, "p": self.motif.p, "e": self.motif.e,
            **self.scheme,
            "value": self.value, "normalized": self.normalized,
            "rho_hat": self.rho_hat, "n": self.n, "warnings": list(self.warnings),
        }
        return d


def edge_density(g: Graph) -> float:
    """Mean degree over ``n - 1``."""
    if g.n < 2:
        raise ValueError("edge density needs at least two vertices")
    return 2.0 * g.num_edges / (g.n * (g.n - 1))


def _normalize(value: float, rho: float, e: int) -> float:
    if e == 0:
        return value
    if rho == 0.0:
        return math.nan
    return value / rho ** e


def copy_counts(g: Graph, patterns: Sequence[MotifPattern]) -> np.ndarray:
    """Exact ``N(R, g)`` for each pattern (patterns may differ in size)."""
    out = np.zeros(len(patterns), dtype=np.int64)
    by_p: dict[int, list[int]] = {}
    for j, r in enumerate(patterns):
        by_p.setdefault(r.p, []).append(j)
    for p, idx in by_p.items():
        if p > g.n:
            continue
        out[idx] = count_leaves(g, p, [patterns[j] for j in idx]).counts
    return out


def exact_count(g: Graph, r: MotifPattern, allow_degenerate: bool = False) -> CountEstimate:
    """Exact ``P(R)`` and ``T(R)`` by full ESU enumeration."""
    if r.p > g.n:
        raise ValueError(f"pattern has {r.p} vertices, graph only {g.n}")
    rho = edge_density(g)
    if rho == 0.0 and r.e > 0 and not allow_degenerate:
        raise DegenerateDensity("degenerate density: graph has no edges")
    N = int(copy_counts(g, [r])[0])
    value = N / (1.0 * r.placements(g.n))
    return CountEstimate(r, value, _normalize(value, rho, r.e), g.n, rho)


def _mean(vals: np.ndarray) -> float:
    # a constant vector averages to itself exactly
    if np.all(vals == vals[0]):
        return float(vals[0])
    return float(vals.mean())


def uniform_bootstrap(g: Graph, r: MotifPattern, cfg: BootstrapConfig) -> CountEstimate:
    """Mean of exact counts on ``B`` induced subgraphs of ``m`` random vertices.

    Each iterate is a proportion within its own subsample (denominator
    ``M(R, m)``); ``rho_hat`` always comes from the full graph.
    """
    if cfg.scheme != "uniform":
        raise ValueError("expected a uniform config")
    m = cfg.m
    if m < r.p:
        raise ValueError(f"subsample size m={m} is below pattern size {r.p}")
    if m > g.n:
        raise ValueError(f"subsample size m={m} exceeds n={g.n}")
    rho = edge_density(g)
    if rho == 0.0 and r.e > 0:
        raise DegenerateDensity("degenerate density: graph has no edges")
    Mm = 1.0 * r.placements(m)
    vals = np.empty(cfg.B)
    for b in range(cfg.B):
        if m == g.n:
            h = g
        else:
            rng = np.random.default_rng([cfg.seed, b])
            h = induced_subgraph(g, np.sort(rng.choice(g.n, size=m, replace=False)))
        vals[b] = int(count_leaves(h, r.p, [r]).counts[0]) / Mm
    value = _mean(vals)
    return CountEstimate(r, value, _normalize(value, rho, r.e), g.n, rho, cfg.describe(), vals)


def subgraph_bootstrap(g: Graph, r: MotifPattern, cfg: BootstrapConfig) -> CountEstimate:
    """Horvitz-Thompson counts from ``B`` independent RAND-ESU passes."""
    if cfg.scheme != "subgraph":
        raise ValueError("expected a subgraph config")
    if len(cfg.q) != r.p:
        raise ValueError(f"need {r.p} retention probabilities, got {len(cfg.q)}")
    if r.p > g.n:
        raise ValueError(f"pattern has {r.p} vertices, graph only {g.n}")
    rho = edge_density(g)
    if rho == 0.0 and r.e > 0:
        raise DegenerateDensity("degenerate density: graph has no edges")
    plan = SamplingPlan(r.p, cfg.q)
    pi = plan.inclusion
    denom = pi * r.placements(g.n)
    vals = np.empty(cfg.B)
    hits = np.empty(cfg.B)
    for b in range(cfg.B):
        lc = count_leaves(g, r.p, [r], q=cfg.q, seed=cfg.seed, iterate=b)
        vals[b] = int(lc.counts[0]) / denom
        hits[b] = lc.hits
    value = _mean(vals)
    warnings = []
    if hits.mean() < MIN_SAMPLED_LEAVES:
        warnings.append(f"few sampled leaves: {hits.mean():.1f} per iterate hold a copy; "
                        "variance will be large")
        log.warning(warnings[-1])
    return CountEstimate(r, value, _normalize(value, rho, r.e), g.n, rho, cfg.describe(), vals, warnings)


def bootstrap_count(g: Graph, r: MotifPattern, cfg: BootstrapConfig) -> CountEstimate:
    if cfg.scheme == "uniform":
        return uniform_bootstrap(g, r, cfg)
    return subgraph_bootstrap(g, r, cfg)


def transitivity_from(p_tri: float, p_vee: float, rho: float) -> float:
    """Transitivity from triangle and vee proportions and the edge density."""
    a = _normalize(p_tri, rho, 3)
    b = _normalize(p_vee, rho, 2)
    if not a + b > 0:
        raise ValueError("no connected triples")
    return a / (a + b)


def transitivity(g_or_counts) -> float:
    """Transitivity of a Graph, or of a ``(P(triangle), P(vee), rho)`` triple."""
    if isinstance(g_or_counts, Graph):
        g = g_or_counts
        rho = edge_density(g)
        if rho == 0.0:
            raise ValueError("no connected triples")
        n_tri, n_vee = copy_counts(g, [triangle(), vee()])
        return transitivity_from(n_tri / triangle().placements(g.n), n_vee / vee().placements(g.n), rho)
    return transitivity_from(*g_or_counts)


def transitivity_gradient(a: float, b: float) -> np.ndarray:
    """Gradient of ``a / (a + b)`` with respect to ``(a, b)``."""
    s = a + b
    if not s != 0 or not np.isfinite(s):
        raise ValueError("gradient undefined at a + b = 0")
    return np.array([b / s ** 2, -a / s ** 2])
