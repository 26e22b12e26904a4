"""ESU enumeration of connected induced vertex sets and its randomised form.

``enumerate_connected_subsets`` visits every vertex set of size ``p`` whose
induced subgraph is connected exactly once. ``sample_connected_subsets``
keeps each child at depth ``d`` with probability ``q[d-1]``, so every leaf is
reached with probability ``prod(q)``.

The heavy lifting lives in :mod:`motifboot._kernels`; this module orders the
graph, prepares spanning-copy lookup tables and maps leaves back to the
caller's vertex ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .graph import Graph
from .motif import MotifPattern

TABLE_MAX_P = 7
MAX_LEAF_P = 11


@dataclass(frozen=True)
class Ordering:
    """``sigma[i]`` is the vertex at position ``i``; ``rank`` is its inverse."""

    sigma: np.ndarray
    rank: np.ndarray


@dataclass(frozen=True)
class SamplingPlan:
    p: int
    q: tuple

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if len(self.q) != self.p:
            raise ValueError(f"need {self.p} retention probabilities, got {len(self.q)}")
        if not all(0.0 < x <= 1.0 for x in self.q):
            raise ValueError("retention probabilities must lie in (0, 1]")

    @property
    def inclusion(self) -> float:
        return float(np.prod(self.q))


def assign_order(g: Graph) -> Ordering:
    """Breadth-first layered order from vertex 0.

    Each layer (the unvisited neighbours of everything visited so far) gets
    the next block of positions, ascending by vertex id. When the frontier
    dies out the search restarts at the lowest unvisited id.
    """
    n = g.n
    seen = np.zeros(n, dtype=bool)
    sigma = np.empty(n, dtype=np.int64)
    filled = 0
    nxt = 0
    indptr, indices = g.indptr, g.indices
    while filled < n:
        while seen[nxt]:
            nxt += 1
        frontier = np.array([nxt])
        seen[nxt] = True
        sigma[filled] = nxt
        filled += 1
        while frontier.size:
            starts, ends = indptr[frontier], indptr[frontier + 1]
            lens = ends - starts
            if lens.sum() == 0:
                break
            idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
            layer = np.unique(indices[idx])
            layer = layer[~seen[layer]]
            seen[layer] = True
            sigma[filled:filled + layer.size] = layer
            filled += layer.size
            frontier = layer.astype(np.int64)
    rank = np.empty(n, dtype=np.int64)
    rank[sigma] = np.arange(n)
    return Ordering(sigma, rank)


@dataclass(frozen=True)
class _Ordered:
    order: Ordering
    indptr: np.ndarray
    indices: np.ndarray


def _ordered(g: Graph) -> _Ordered:
    cached = g.__dict__.get("_esu_ordered")
    if cached is None:
        order = assign_order(g)
        h = g.relabel(order.rank)
        cached = _Ordered(order, h.indptr, h.indices)
        g.__dict__["_esu_ordered"] = cached
    return cached


@lru_cache(maxsize=64)
def _table(pattern: MotifPattern) -> np.ndarray:
    nbits = pattern.p * (pattern.p - 1) // 2
    return _kernels.build_table(pattern.copy_masks().astype(np.int64), nbits)


def _lookup(patterns: Sequence[MotifPattern], p: int):
    if not patterns:
        return True, np.zeros((1, 1 << (p * (p - 1) // 2)), dtype=np.int32), np.zeros((1, 1), np.uint64), np.zeros(1, np.int64)
    if any(r.p != p for r in patterns):
        raise ValueError("all patterns in one pass must have the same vertex count")
    if p <= TABLE_MAX_P:
        tables = np.stack([_table(r) for r in patterns])
        return True, tables, np.zeros((1, 1), np.uint64), np.zeros(1, np.int64)
    if p > MAX_LEAF_P:
        raise ValueError(f"leaf size {p} exceeds {MAX_LEAF_P}")
    cms = [r.copy_masks() for r in patterns]
    width = max(c.size for c in cms)
    copies = np.zeros((len(cms), width), dtype=np.uint64)
    for j, c in enumerate(cms):
        copies[j, :c.size] = c
    return False, np.zeros((1, 1), np.int32), copies, np.array([c.size for c in cms], dtype=np.int64)


def _logq(q: Sequence[float], p: int) -> np.ndarray:
    out = np.zeros(p + 1)
    for d, x in enumerate(q):
        out[d] = 0.0 if x >= 1.0 else math.log1p(-x)
    return out


@dataclass
class LeafCounts:
    """Totals from one ESU / RAND-ESU pass."""

    counts: np.ndarray      # spanning copies summed over visited leaves, per pattern
    leaves: int             # leaves visited
    hits: int               # leaves spanning at least one copy of some pattern
    inclusion: float        # prod(q); 1.0 for full enumeration


def count_leaves(g: Graph, p: int, patterns: Sequence[MotifPattern] = (), q: Sequence[float] | None = None,
                 seed: int = 0, iterate: int = 0, roots: tuple[int, int] | None = None) -> LeafCounts:
    """Sum spanning-copy counts of ``patterns`` over the (sampled) ESU leaves."""
    if not 1 <= p <= g.n:
        raise ValueError(f"subset size {p} must lie in [1, n={g.n}]")
    if q is None:
        q = (1.0,) * p
    SamplingPlan(p, tuple(q))
    od = _ordered(g)
    use_table, tables, copies, ncopies = _lookup(list(patterns), p)
    counts = np.zeros(max(len(patterns), 1), dtype=np.int64)
    stats = np.zeros(4, dtype=np.int64)
    lo, hi = roots if roots is not None else (0, g.n)
    _kernels.esu_run(od.indptr, od.indices, p, _logq(q, p), lo, hi, np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                     np.uint64(iterate), use_table, tables, copies, ncopies, counts, stats,
                     0, np.zeros((0, p), np.int32), np.zeros((0, counts.size), np.int64))
    return LeafCounts(counts[:len(patterns)], int(stats[0]), int(stats[1]), float(np.prod(q)))


def collect_leaves(g: Graph, p: int, q: Sequence[float] | None = None, seed: int = 0, iterate: int = 0,
                   patterns: Sequence[MotifPattern] = (), chunk: int = 1 << 20):
    """Visited leaves as an ``(L, p)`` array of original vertex ids, rows sorted.

    With ``patterns`` given, only leaves spanning at least one copy of some
    pattern are kept, and an ``(L, len(patterns))`` array of spanning-copy
    counts is returned alongside.
    """
    if not 1 <= p <= g.n:
        raise ValueError(f"subset size {p} must lie in [1, n={g.n}]")
    if q is None:
        q = (1.0,) * p
    SamplingPlan(p, tuple(q))
    od = _ordered(g)
    pats = list(patterns)
    use_table, tables, copies, ncopies = _lookup(pats, p)
    npat = max(len(pats), 1)
    mode = 2 if pats else 1
    logq = _logq(q, p)
    seed64 = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    out_v, out_w = [], []
    buf = np.empty((chunk, p), dtype=np.int32)
    wbuf = np.empty((chunk, npat), dtype=np.int64)
    # widen the root window while output fits; narrow it on overflow
    lo, width = 0, max(1, g.n // 64)
    while lo < g.n:
        hi = min(g.n, lo + width)
        counts = np.zeros(npat, dtype=np.int64)
        stats = np.zeros(4, dtype=np.int64)
        k = _kernels.esu_run(od.indptr, od.indices, p, logq, lo, hi, seed64, np.uint64(iterate),
                             use_table, tables, copies, ncopies, counts, stats, mode, buf, wbuf)
        if stats[2] > 0:
            if hi - lo == 1:
                buf = np.empty((k + int(stats[2]), p), dtype=np.int32)
                wbuf = np.empty((buf.shape[0], npat), dtype=np.int64)
            else:
                width = max(1, (hi - lo) // 4)
            continue
        out_v.append(od.order.sigma[buf[:k]])
        out_w.append(wbuf[:k].copy())
        lo = hi
        if k < buf.shape[0] // 4:
            width *= 2
    leaves = np.concatenate(out_v) if out_v else np.empty((0, p), dtype=np.int64)
    leaves.sort(axis=1)
    if not pats:
        return leaves
    weights = np.concatenate(out_w) if out_w else np.empty((0, npat), dtype=np.int64)
    return leaves, weights


def enumerate_connected_subsets(g: Graph, p: int, visit: Callable[[tuple], None] | None = None) -> int:
    """Visit every connected induced ``p``-vertex set once; return how many."""
    if p > g.n:
        raise ValueError(f"p={p} exceeds n={g.n}")
    if visit is None:
        return count_leaves(g, p).leaves
    leaves = collect_leaves(g, p)
    for row in leaves:
        visit(tuple(int(x) for x in row))
    return leaves.shape[0]


def sample_connected_subsets(g: Graph, plan: SamplingPlan, seed: int = 0, iterate: int = 0,
                             visit: Callable[[tuple], None] | None = None) -> int:
    """RAND-ESU: each leaf is visited with probability ``plan.inclusion``."""
    if plan.p > g.n:
        raise ValueError(f"p={plan.p} exceeds n={g.n}")
    if visit is None:
        return count_leaves(g, plan.p, q=plan.q, seed=seed, iterate=iterate).leaves
    leaves = collect_leaves(g, plan.p, q=plan.q, seed=seed, iterate=iterate)
    for row in leaves:
        visit(tuple(int(x) for x in row))
    return leaves.shape[0]
