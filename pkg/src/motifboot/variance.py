"""Variance and covariance estimates for normalised counts.

Everything is built on ordered pairs ``(S, T)`` of copies whose vertex sets
intersect. For an exchangeable random graph on ``n`` vertices,

    Cov(N1, N2) = A - y * E[N1] E[N2],    A = sum of E 1(S ∪ T ⊆ G),

where ``y`` is the fraction of placement pairs that intersect. Replacing
``A`` by its observed value and ``E[N1] E[N2]`` by ``(N1 N2 - A) / (1 - y)``
gives an unbiased estimate of the covariance.

Two routes count the intersecting pairs:

``moments``
    For ``U`` a vertex set let ``c_U`` be the number of copies containing
    ``U``. With ``m_s = sum over |U| = s of c1_U c2_U`` the number of pairs
    sharing exactly ``k`` vertices is ``sum_s (-1)^(s-k) C(s, k) m_s``. Only
    leaves of the pattern's own size are needed.
``merged``
    Counts each union type ``W`` directly and weights it by the number of
    ordered pairs that produce one labelled copy of ``W``. This is the
    textbook form; it needs ESU at size up to ``p1 + p2 - 1`` and is meant for
    small hosts and cross-checks.

By default all overlap sizes are counted and the result is carried to the
scale of ``T = rho_hat^-e P`` by a delta step that accounts for ``rho_hat``
being estimated from the same graph (``density="adjusted"``). The
leading-term form, with overlaps ``{1, p}`` (``{1}`` across patterns) and
``rho`` treated as known, is ``overlaps="leading", density="fixed"``.

All variances are on the ``sqrt(n)`` scale: ``sigma2 = n * Var``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .esu import collect_leaves, count_leaves
from .estimators import BootstrapConfig, DegenerateDensity, edge_density
from .graph import Graph, induced_subgraph
from .motif import MotifPattern, edge, merged_patterns, merged_patterns_cross

DENSE_GROUPS = 1 << 22


class ScopeError(ValueError):
    """Pattern outside the acyclic / p-cycle scope of the variance formulas."""


def correction_y(n: int, p1: int, p2: int) -> float:
    """Fraction of placement pairs of sizes ``p1`` and ``p2`` that share a vertex."""
    if n < p1 + p2:
        raise ValueError(f"host too small for overlap-0 term: n={n} < {p1 + p2}")
    # (n-p1)_(p2) / (n)_(p2) as a product of p2 factors 1 - p1 / (n - i), kept in log1p form
    return -math.expm1(math.fsum(math.log1p(-p1 / (n - i)) for i in range(p2)))


def correction_x(n: int, p: int) -> float:
    return correction_y(n, p, p)


def _check_scope(r: MotifPattern):
    if r.klass not in ("acyclic", "p-cycle"):
        raise ScopeError(f"variance formula out of scope for {r.name} ({r.klass})")


# ---------------------------------------------------------------------------
# intersecting-pair counts


@dataclass
class PairCounts:
    """Ordered intersecting-pair counts among a list of patterns.

    ``pairs[k][j, l]`` counts pairs (copy of pattern j, copy of pattern l)
    sharing exactly ``k`` vertices (``pairs[0]`` is unused).
    ``NN[j, l]`` estimates ``N_j N_l``; ``N`` the counts themselves.
    ``resampling`` is the covariance of the count estimate due to resampling
    alone (zero for exact counts).
    """

    patterns: list
    N: np.ndarray
    NN: np.ndarray
    pairs: list
    resampling: np.ndarray

    def intersecting(self, overlaps: str = "all") -> np.ndarray:
        k_max = len(self.pairs) - 1
        if overlaps == "all":
            return sum(self.pairs[1:], np.zeros_like(self.NN))
        if overlaps != "leading":
            raise ValueError(f"unknown overlap scope {overlaps!r}")
        A = self.pairs[1].copy() if k_max >= 1 else np.zeros_like(self.NN)
        for j, r in enumerate(self.patterns):
            if r.p > 1 and r.p <= k_max:
                A[j, j] += self.pairs[r.p][j, j]
        return A


@dataclass
class _LeafBlock:
    """Leaves of one size with Horvitz-Thompson weighted copy counts per pattern."""

    p: int
    cols: np.ndarray        # pattern indices, one per column of W
    leaves: np.ndarray      # (L, p) sorted rows
    W: np.ndarray           # (L, len(cols)) copies / inclusion probability
    pi: float


def _blocks(g: Graph, patterns, idx, q=None, seed=0, iterate=0) -> list:
    by_p: dict[int, list[int]] = {}
    for j in idx:
        by_p.setdefault(patterns[j].p, []).append(j)
    out = []
    for p, js in sorted(by_p.items()):
        if p > g.n:
            continue
        qp = None if q is None else q(p)
        pi = 1.0 if qp is None else float(np.prod(qp))
        leaves, w = collect_leaves(g, p, q=qp, seed=seed, iterate=iterate, patterns=[patterns[j] for j in js])
        W = w.astype(np.float64)
        if pi != 1.0:
            W /= pi
        out.append(_LeafBlock(p, np.array(js, dtype=np.int64), leaves.astype(np.int32), W, pi))
    return out


def _codes(leaves: np.ndarray, s: int, n: int):
    combos = np.array(list(itertools.combinations(range(leaves.shape[1]), s)), dtype=np.int64)
    if float(n) ** s < 2.0 ** 62:
        return _kernels.subset_codes(leaves, combos, n), combos.shape[0]
    sub = np.ascontiguousarray(leaves[:, combos].reshape(-1, s).astype(np.int64))
    return sub.view(np.dtype((np.void, 8 * s))).ravel(), combos.shape[0]


def _subset_moments(fixed: list, iters: list, npat: int, n: int, s: int) -> np.ndarray:
    """``m_s`` between all patterns: exact blocks enter as is, sampled blocks
    from distinct passes are paired so every product stays unbiased."""
    B = len(iters)
    srcs = [(None, blk) for blk in fixed if blk.p >= s]
    srcs += [(b, blk) for b, blks in enumerate(iters) for blk in blks if blk.p >= s]
    mom = np.zeros((npat, npat))
    if not srcs:
        return mom
    if all(blk.p == s for _, blk in srcs):
        # only full-size leaves: each source lists every leaf at most once
        for b, blk in srcs:
            if b is None:
                mom[np.ix_(blk.cols, blk.cols)] += blk.W.T @ blk.W
            else:
                mom[np.ix_(blk.cols, blk.cols)] += blk.pi * (blk.W.T @ blk.W) / B
        return mom
    coded = [_codes(blk.leaves, s, n) for _, blk in srcs]
    if coded[0][0].dtype == np.int64 and n ** s <= DENSE_GROUPS:
        ng = n ** s
        index = [c for c, _ in coded]
    else:
        allc = np.concatenate([c for c, _ in coded])
        uniq, inv = np.unique(allc, return_inverse=True)
        ng = uniq.size
        inv = inv.ravel()
        bounds = np.cumsum([0] + [c.size for c, _ in coded])
        index = [inv[bounds[i]:bounds[i + 1]] for i in range(len(coded))]
    F = np.zeros((ng, npat))
    S = np.zeros((ng, npat)) if B else None
    Q = np.zeros((npat, npat))
    per_iter: dict[int, list[int]] = {}
    for i, (b, blk) in enumerate(srcs):
        if b is None:
            _kernels.scatter_rows(index[i], blk.W, coded[i][1], blk.cols, F)
        else:
            per_iter.setdefault(b, []).append(i)
    for b, members in per_iter.items():
        G = np.zeros((ng, npat))
        for i in members:
            _kernels.scatter_rows(index[i], srcs[i][1].W, coded[i][1], srcs[i][1].cols, G)
        S += G
        Q += G.T @ G
    mom = F.T @ F
    if B:
        mom += (F.T @ S + S.T @ F) / B
    if B > 1:
        mom += (S.T @ S - Q) / (B * (B - 1))
        # a leaf pairs only with itself at full overlap: one pass is unbiased
        full = [blk for blks in iters for blk in blks if blk.p == s]
        for blk in full:
            mom[np.ix_(blk.cols, blk.cols)] = 0.0
        for blk in full:
            mom[np.ix_(blk.cols, blk.cols)] += blk.pi * (blk.W.T @ blk.W) / B
    return mom


def _overlap_counts(moments: list, k_max: int) -> list:
    """Pairs sharing exactly k vertices from the subset moments m_1..m_kmax."""
    pairs = [None]
    for k in range(1, k_max + 1):
        acc = np.zeros_like(moments[1])
        for s in range(k, k_max + 1):
            acc += (-1) ** (s - k) * math.comb(s, k) * moments[s]
        pairs.append(acc)
    return pairs


def _block_totals(blocks, npat) -> np.ndarray:
    N = np.zeros(npat)
    for blk in blocks:
        N[blk.cols] += blk.W.sum(axis=0)
    return N


def _exact_pairs(g: Graph, patterns) -> PairCounts:
    npat = len(patterns)
    fixed = _blocks(g, patterns, range(npat))
    N = _block_totals(fixed, npat)
    k_max = max(r.p for r in patterns)
    moments = [None] + [_subset_moments(fixed, [], npat, g.n, s) for s in range(1, k_max + 1)]
    return PairCounts(list(patterns), N, np.outer(N, N), _overlap_counts(moments, k_max),
                      np.zeros((npat, npat)))


def _inclusion_m(n: int, m: int, t: int) -> float:
    # probability that t fixed vertices all land in a uniform m-subset
    if t > m:
        return 0.0
    return math.prod((m - i) / (n - i) for i in range(t))


def _paired_mean(vecs: np.ndarray) -> np.ndarray:
    """Mean of x_b x_b'^T over ordered pairs b != b' of rows of ``vecs``."""
    B = vecs.shape[0]
    s = vecs.sum(axis=0)
    return (np.outer(s, s) - vecs.T @ vecs) / (B * (B - 1))


def _uniform_pairs(g: Graph, patterns, cfg: BootstrapConfig, subsets=None) -> PairCounts:
    """``subsets`` overrides the random draws (exhaustive checks)."""
    m, B = cfg.m, cfg.B
    if subsets is not None:
        subsets = [np.sort(np.asarray(s, dtype=np.int64)) for s in subsets]
        B = len(subsets)
    if B < 2:
        raise ValueError("bootstrap variance needs B >= 2")
    npat = len(patterns)
    k_max = max(r.p for r in patterns)
    p = np.array([r.p for r in patterns])
    union = p[:, None] + p[None, :]
    need = int((union - 1).max())
    if m < need:
        raise ValueError(f"subsample size m={m} below the largest union size {need}")
    Ns = np.empty((B, npat))
    pairs = [None] + [np.zeros((npat, npat)) for _ in range(k_max)]
    for b in range(B):
        if subsets is None:
            rng = np.random.default_rng([cfg.seed, b])
            h = induced_subgraph(g, np.sort(rng.choice(g.n, size=m, replace=False)))
        else:
            h = induced_subgraph(g, subsets[b])
        pc = _exact_pairs(h, patterns)
        Ns[b] = pc.N / np.array([_inclusion_m(g.n, m, int(t)) for t in p])
        for k in range(1, k_max + 1):
            scale = np.vectorize(lambda t: _inclusion_m(g.n, m, int(t)))(union - k)
            with np.errstate(divide="ignore", invalid="ignore"):
                pairs[k] += np.where(pc.pairs[k] != 0, pc.pairs[k] / scale, 0.0)
    pairs = [None] + [a / B for a in pairs[1:]]
    N = Ns.mean(axis=0)
    return PairCounts(list(patterns), N, _paired_mean(Ns), pairs, np.cov(Ns.T, ddof=1).reshape(npat, npat) / B)


def _subgraph_pairs(g: Graph, patterns, cfg: BootstrapConfig) -> PairCounts:
    B = cfg.B
    npat = len(patterns)
    pis = np.array([float(np.prod(cfg.q_for(r.p))) for r in patterns])
    rand = [j for j in range(npat) if pis[j] < 1.0]
    fixed = [j for j in range(npat) if pis[j] == 1.0]
    if rand and B < 2:
        raise ValueError("bootstrap variance needs B >= 2")
    fixed_blocks = _blocks(g, patterns, fixed)
    iters = [_blocks(g, patterns, rand, q=cfg.q_for, seed=cfg.seed, iterate=b) for b in range(B)]
    Nf = _block_totals(fixed_blocks, npat)
    Ns = np.array([Nf + _block_totals(blks, npat) for blks in iters])
    k_max = max(r.p for r in patterns)
    moments = [None] + [_subset_moments(fixed_blocks, iters, npat, g.n, s) for s in range(1, k_max + 1)]
    N = Ns.mean(axis=0)
    NN = _paired_mean(Ns)
    NN[np.ix_(fixed, fixed)] = np.outer(N[fixed], N[fixed])
    resampling = np.cov(Ns.T, ddof=1).reshape(npat, npat) / B
    return PairCounts(list(patterns), N, NN, _overlap_counts(moments, k_max), resampling)


def _is_exact(cfg: BootstrapConfig | None, g: Graph, patterns) -> bool:
    if cfg is None:
        return True
    if cfg.scheme == "uniform":
        return cfg.m == g.n
    return all(np.prod(cfg.q_for(r.p)) == 1.0 for r in patterns)


def pair_counts(g: Graph, patterns: Sequence[MotifPattern], cfg: BootstrapConfig | None = None) -> PairCounts:
    """Intersecting-pair counts by subset moments, exact or resampled.

    The uniform scheme recounts on ``m``-vertex subsamples and reweights each
    pair by the inclusion probability of its union. The subgraph scheme
    pairs leaves from distinct RAND-ESU passes, so products of
    Horvitz-Thompson estimates stay unbiased.
    """
    patterns = list(patterns)
    if _is_exact(cfg, g, patterns):
        return _exact_pairs(g, patterns)
    if cfg.scheme == "uniform":
        return _uniform_pairs(g, patterns, cfg)
    return _subgraph_pairs(g, patterns, cfg)


def merged_pair_counts(g: Graph, patterns: Sequence[MotifPattern], cfg: BootstrapConfig | None = None,
                       overlaps: str = "leading") -> tuple[PairCounts, dict]:
    """Intersecting-pair counts by counting union types ``W`` directly.

    Returns the counts and a ``{W name: (multiplicity, count)}`` breakdown.
    Counts of ``W`` come from ESU at size ``p_W`` (exact) or from the
    configured bootstrap, with the subgraph ``q`` padded by its last entry.
    """
    from .estimators import bootstrap_count

    patterns = list(patterns)
    npat = len(patterns)
    k_max = max(r.p for r in patterns)
    pairs = [None] + [np.zeros((npat, npat)) for _ in range(k_max)]
    breakdown = {}

    def count(r):
        if cfg is None or _is_exact(cfg, g, [r]):
            return float(count_leaves(g, r.p, [r]).counts[0])
        c = cfg if cfg.scheme == "uniform" else BootstrapConfig.subgraph(cfg.q_for(r.p), cfg.B, cfg.seed)
        return bootstrap_count(g, r, c).value * r.placements(g.n)

    for j in range(npat):
        for l in range(j, npat):
            r1, r2 = patterns[j], patterns[l]
            if overlaps == "all":
                ks = tuple(range(1, min(r1.p, r2.p) + 1))
            elif j == l:
                ks = (1, r1.p)
            else:
                ks = (1,)
            types = merged_patterns(r1, ks) if j == l else merged_patterns_cross(r1, r2, ks)
            for mp in types:
                if mp.p_w > g.n:
                    continue
                c = count(mp.w)
                breakdown[mp.w.name] = (mp.multiplicity, c)
                pairs[mp.overlap][j, l] += mp.multiplicity * c
                if l != j:
                    pairs[mp.overlap][l, j] += mp.multiplicity * c
    N = np.array([count(r) for r in patterns])
    return PairCounts(patterns, N, np.outer(N, N), pairs, np.zeros((npat, npat))), breakdown


def count_covariance(pc: PairCounts, n: int, overlaps: str = "all") -> np.ndarray:
    """Covariance matrix of the raw counts ``N_j``."""
    A = pc.intersecting(overlaps)
    npat = len(pc.patterns)
    C = np.empty((npat, npat))
    for j in range(npat):
        for l in range(npat):
            y = correction_y(n, pc.patterns[j].p, pc.patterns[l].p)
            C[j, l] = (A[j, l] - y * pc.NN[j, l]) / (1.0 - y)
    return C


# ---------------------------------------------------------------------------
# normalised-scale estimates


@dataclass
class VarianceEstimate:
    """Variance (or covariance) of normalised counts on the sqrt(n) scale.

    ``sigma2`` estimates ``n * Cov(T1, T2)``; ``resampling`` is the extra
    ``n * Cov`` contributed by bootstrap noise in the point estimates, and
    ``total`` their sum.
    """

    motifs: tuple
    sigma2: float
    terms: dict
    correction: float
    resampling: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.sigma2 + self.resampling

    def to_dict(self) -> dict:
        return {"motifs": [r.name for r in self.motifs], "sigma2": self.sigma2,
                "resampling": self.resampling, "terms": self.terms,
                "correction": self.correction, **self.meta}


@dataclass
class CovarianceMatrix:
    """``n * Cov`` of a vector of normalised counts."""

    motifs: tuple
    sigma: np.ndarray
    estimates: np.ndarray
    resampling: np.ndarray
    repaired: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def total(self) -> np.ndarray:
        return self.sigma + self.resampling

    def psd(self, include_resampling: bool = True) -> "CovarianceMatrix":
        """Copy with negative eigenvalues clamped to zero."""
        S = self.total if include_resampling else self.sigma
        S = (S + S.T) / 2
        vals, vecs = np.linalg.eigh(S)
        clamped = bool((vals < 0).any())
        S = (vecs * np.clip(vals, 0, None)) @ vecs.T
        return CovarianceMatrix(self.motifs, S, self.estimates, np.zeros_like(S),
                                self.repaired or clamped, dict(self.meta, psd_clamped=clamped))

    def to_dict(self) -> dict:
        return {"motifs": [r.name for r in self.motifs], "sigma": self.sigma.tolist(),
                "resampling": self.resampling.tolist(), "estimates": self.estimates.tolist(),
                "psd_repaired": self.repaired, **self.meta}


def _setup(g: Graph, patterns, density: str):
    for r in patterns:
        _check_scope(r)
    rho = edge_density(g)
    if rho == 0.0:
        raise DegenerateDensity("degenerate density: graph has no edges")
    if density not in ("adjusted", "fixed"):
        raise ValueError(f"unknown density mode {density!r}")
    full = list(patterns)
    if density == "adjusted":
        full.append(edge())
    return rho, full


def _jacobian(patterns, N: np.ndarray, n: int, rho: float, density: str) -> tuple[np.ndarray, np.ndarray]:
    """d T / d N for ``T_j = N_j / (M_j rho^e_j)``, with ``rho`` itself a count when adjusted."""
    k = len(patterns)
    scale = np.array([1.0 / (r.placements(n) * rho ** r.e) for r in patterns])
    T = N[:k] * scale
    J = np.zeros((k, N.size))
    J[np.arange(k), np.arange(k)] = scale
    if density == "adjusted":
        me = edge().placements(n)
        for j, r in enumerate(patterns):
            J[j, k] = -r.e * T[j] / (me * rho)
    return J, T


def covariance_matrix(g: Graph, patterns: Sequence[MotifPattern], cfg: BootstrapConfig | None = None,
                      overlaps: str = "all", density: str = "adjusted", method: str = "moments") -> CovarianceMatrix:
    """``n * Cov`` of ``(T_1, ..., T_k)`` with the configured estimator."""
    patterns = list(patterns)
    rho, full = _setup(g, patterns, density)
    if method == "moments":
        pc = pair_counts(g, full, cfg)
    elif method == "merged":
        pc, _ = merged_pair_counts(g, full, cfg, overlaps)
    else:
        raise ValueError(f"unknown method {method!r}")
    cm = covariance_from_pairs(pc, g.n, rho, len(patterns), overlaps, density)
    cm.meta.update(method=method, scheme={"scheme": "exact"} if cfg is None else cfg.describe())
    return cm


def _cancel(value, bound):
    """Zero entries that are pure rounding noise relative to the terms summed into them."""
    noise = 64 * np.finfo(float).eps * bound
    return np.where(np.abs(value) <= noise, 0.0, value)


def covariance_from_pairs(pc: PairCounts, n: int, rho: float, k: int | None = None, overlaps: str = "all",
                          density: str = "adjusted") -> CovarianceMatrix:
    """Normalised covariance of the first ``k`` patterns of ``pc``.

    With ``density="adjusted"`` the edge pattern must be among the patterns of
    ``pc`` (it is looked up by name). One ``PairCounts`` serves every
    overlap scope and density mode.
    """
    k = len(pc.patterns) if k is None else k
    patterns = pc.patterns[:k]
    idx = list(range(k))
    if density == "adjusted":
        names = [r.name for r in pc.patterns]
        if "edge" not in names:
            raise ValueError("density adjustment needs edge counts in the pair counts")
        idx.append(names.index("edge"))
    sub = PairCounts([pc.patterns[i] for i in idx], pc.N[idx], pc.NN[np.ix_(idx, idx)],
                     [None] + [a[np.ix_(idx, idx)] for a in pc.pairs[1:]], pc.resampling[np.ix_(idx, idx)])
    C = count_covariance(sub, n, overlaps)
    J, T = _jacobian(patterns, sub.N, n, rho, density)
    sigma = _cancel(n * (J @ C @ J.T), n * (np.abs(J) @ np.abs(C) @ np.abs(J).T))
    res = n * (J @ sub.resampling @ J.T)
    meta = {"overlaps": overlaps, "density": density, "n": n, "rho_hat": rho}
    return CovarianceMatrix(tuple(patterns), sigma, T, res, meta=meta)


def _single(g, r1, r2, cfg, overlaps, density, method) -> VarianceEstimate:
    pats = [r1] if r2 is None else [r1, r2]
    rho, full = _setup(g, pats, density)
    n = g.n
    breakdown = None
    if method == "moments":
        pc = pair_counts(g, full, cfg)
    elif method == "merged":
        pc, breakdown = merged_pair_counts(g, full, cfg, overlaps)
    else:
        raise ValueError(f"unknown method {method!r}")
    C = count_covariance(pc, n, overlaps)
    J, T = _jacobian(pats, pc.N, n, rho, density)
    a, b = (0, 0) if r2 is None else (0, 1)
    y = correction_y(n, r1.p, (r1 if r2 is None else r2).p)
    # split n * J_a C J_b^T by the count pair it comes from
    terms = {}
    names = [r.name for r in full]
    for j in range(len(full)):
        for l in range(len(full)):
            v = n * J[a, j] * C[j, l] * J[b, l]
            if v != 0.0:
                terms[f"{names[j]}|{names[l]}"] = v
    sigma2 = float(_cancel(n * (J[a] @ C @ J[b]), n * (np.abs(J[a]) @ np.abs(C) @ np.abs(J[b]))))
    res = float(n * (J[a] @ pc.resampling @ J[b]))
    meta = {"overlaps": overlaps, "density": density, "method": method, "n": n, "rho_hat": rho,
            "estimates": T.tolist(), "scheme": {"scheme": "exact"} if cfg is None else cfg.describe()}
    if breakdown is not None:
        meta["merged"] = {k: {"multiplicity": m, "count": c} for k, (m, c) in breakdown.items()}
    return VarianceEstimate(tuple(pats), sigma2, terms, y, res, meta)


def empirical_variance(g: Graph, r: MotifPattern, overlaps: str = "all", density: str = "adjusted",
                       method: str = "moments") -> VarianceEstimate:
    """``n * Var(T(R))`` from exact counts on ``g``."""
    return _single(g, r, None, None, overlaps, density, method)


def empirical_covariance(g: Graph, r1: MotifPattern, r2: MotifPattern, overlaps: str = "all",
                         density: str = "adjusted", method: str = "moments") -> VarianceEstimate:
    """``n * Cov(T(R1), T(R2))`` from exact counts on ``g``."""
    return _single(g, r1, r2, None, overlaps, density, method)


def bootstrap_variance(g: Graph, r: MotifPattern, cfg: BootstrapConfig, overlaps: str = "all",
                       density: str = "adjusted", method: str = "moments") -> VarianceEstimate:
    """``n * Var(T(R))`` with every count replaced by its bootstrap estimate."""
    return _single(g, r, None, cfg, overlaps, density, method)


def bootstrap_covariance(g: Graph, r1: MotifPattern, r2: MotifPattern, cfg: BootstrapConfig,
                         overlaps: str = "all", density: str = "adjusted", method: str = "moments") -> VarianceEstimate:
    return _single(g, r1, r2, cfg, overlaps, density, method)


def delta_variance(values, sigma, gradient) -> float:
    """``g^T Sigma g`` for a smooth function with gradient ``g`` at ``values``."""
    values = np.asarray(values, dtype=float).ravel()
    S = np.asarray(sigma.total if isinstance(sigma, CovarianceMatrix) else sigma, dtype=float)
    grad = np.asarray(gradient, dtype=float).ravel()
    if S.ndim != 2 or S.shape != (values.size, values.size) or grad.size != values.size:
        raise ValueError("dimension mismatch between values, sigma and gradient")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    return float(grad @ S @ grad)
