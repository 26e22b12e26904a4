"""Small connected patterns: catalog, automorphisms, isomorphism and copies.

Everything here is brute force over vertex permutations, vectorised with
numpy. Edge sets of small graphs are encoded as bitmasks in colex order: the
pair ``(i, j)`` with ``i < j`` owns bit ``j*(j-1)//2 + i``. The mask of the
first ``k`` vertices is then a prefix of the mask of the first ``k+1``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_VERTICES = 10


class PatternError(ValueError):
    pass


def pair_bit(i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


def edges_to_mask(edges) -> int:
    m = 0
    for a, b in edges:
        m |= 1 << pair_bit(a, b)
    return m


def mask_to_edges(p: int, mask: int) -> tuple[tuple[int, int], ...]:
    out = []
    for j in range(1, p):
        for i in range(j):
            if mask >> pair_bit(i, j) & 1:
                out.append((i, j))
    return tuple(out)


@lru_cache(maxsize=None)
def _perm_array(p: int) -> np.ndarray:
    """All permutations of ``range(p)`` as a ``(p!, p)`` int8 array."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for k in range(p):
        blocks = []
        for pos in range(k + 1):
            blocks.append(np.insert(perms, pos, k, axis=1))
        perms = np.concatenate(blocks)
    perms.setflags(write=False)
    return perms


@lru_cache(maxsize=None)
def _bit_table(p: int) -> np.ndarray:
    t = np.zeros((max(p, 1), max(p, 1)), dtype=np.uint64)
    for i in range(p):
        for j in range(p):
            if i != j:
                t[i, j] = np.uint64(1) << np.uint64(pair_bit(i, j))
    return t


def _check_size(p: int, limit: int | None) -> None:
    lim = MAX_VERTICES if limit is None else limit
    if p > lim:
        raise PatternError(f"{p} vertices exceeds the brute-force limit of {lim}")


@lru_cache(maxsize=4096)
def _image_masks(p: int, edges: tuple) -> np.ndarray:
    """Edge mask of the pattern under every permutation (one row per perm)."""
    perms = _perm_array(p)
    bits = _bit_table(p)
    out = np.zeros(perms.shape[0], dtype=np.uint64)
    for a, b in edges:
        out |= bits[perms[:, a], perms[:, b]]
    return out


@lru_cache(maxsize=4096)
def _copies(p: int, edges: tuple) -> np.ndarray:
    masks = np.unique(_image_masks(p, edges))
    masks.setflags(write=False)
    return masks


def _canonical(p: int, edges: tuple) -> int:
    return int(_image_masks(p, edges).min()) if edges else 0


def _degrees(p: int, edges) -> list[int]:
    d = [0] * p
    for a, b in edges:
        d[a] += 1
        d[b] += 1
    return d


def _is_connected(p: int, edges) -> bool:
    if p == 1:
        return True
    adj = [set() for _ in range(p)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {0}, [0]
    while stack:
        for u in adj[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == p


def _normalize_edges(p: int, edges) -> tuple[tuple[int, int], ...]:
    out = set()
    for a, b in edges:
        a, b = int(a), int(b)
        if a == b or not (0 <= a < p and 0 <= b < p):
            raise PatternError(f"bad pattern edge ({a}, {b})")
        out.add((min(a, b), max(a, b)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class MotifPattern:
    """A connected pattern graph on vertices ``0..p-1``.

    ``aut`` is the number of automorphisms and ``klass`` one of
    ``"acyclic"``, ``"p-cycle"`` or ``"other-cyclic"``.
    """

    p: int
    edges: tuple
    name: str = ""
    aut: int = field(default=0, compare=False)
    klass: str = field(default="", compare=False)

    @classmethod
    def from_edges(cls, edges, p: int | None = None, name: str = "", limit: int | None = None):
        edges = list(edges)
        if p is None:
            p = 1 + max((max(e) for e in edges), default=0)
        es = _normalize_edges(p, edges)
        if not _is_connected(p, es):
            raise PatternError("pattern must be connected")
        _check_size(p, limit)
        aut = automorphism_count(es, p, limit=limit)
        deg = _degrees(p, es)
        if len(es) == p - 1:
            klass = "acyclic"
        elif len(es) == p and all(d == 2 for d in deg):
            klass = "p-cycle"
        else:
            klass = "other-cyclic"
        return cls(p, es, name or f"custom:{','.join(f'{a}-{b}' for a, b in es)}", aut, klass)

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def mask(self) -> int:
        return edges_to_mask(self.edges)

    def copy_masks(self) -> np.ndarray:
        """Masks of every distinct labelled copy on ``p`` fixed vertices."""
        return _copies(self.p, self.edges)

    @property
    def canonical(self) -> int:
        return _canonical(self.p, self.edges)

    def placements(self, n: int) -> float:
        """Number of copies of the pattern in the complete graph on ``n`` vertices."""
        if n < self.p:
            return 0.0
        return math.comb(n, self.p) * (math.factorial(self.p) // self.aut)

    def log_placements(self, n: int) -> float:
        return (math.lgamma(n + 1) - math.lgamma(n - self.p + 1)) - math.log(self.aut)

    def __str__(self):
        return self.name


def wheel(k: int, l: int) -> MotifPattern:
    """Hub 0 with ``l`` arms, each a path of ``k`` further vertices."""
    if k < 1 or l < 1:
        raise PatternError("wheel needs k >= 1 and l >= 1")
    edges = []
    for a in range(l):
        first = a * k + 1
        edges.append((0, first))
        edges.extend((first + j, first + j + 1) for j in range(k - 1))
    return MotifPattern.from_edges(edges, k * l + 1, name=f"wheel:{k},{l}")


def cycle(p: int) -> MotifPattern:
    if p < 3:
        raise PatternError("a cycle needs at least 3 vertices")
    return MotifPattern.from_edges([(i, (i + 1) % p) for i in range(p)], p, name=f"cycle:{p}")


def edge() -> MotifPattern:
    return MotifPattern.from_edges([(0, 1)], 2, name="edge")


def vee() -> MotifPattern:
    return MotifPattern.from_edges([(0, 1), (0, 2)], 3, name="vee")


def triangle() -> MotifPattern:
    return MotifPattern.from_edges([(0, 1), (1, 2), (0, 2)], 3, name="triangle")


def parse_motif(text: str) -> MotifPattern:
    """Parse ``edge``, ``vee``, ``triangle``, ``cycle:p``, ``wheel:k,l`` or
    ``custom:0-1,1-2,...``."""
    t = text.strip().lower()
    try:
        if t == "edge":
            return edge()
        if t == "vee":
            return vee()
        if t == "triangle":
            return triangle()
        if t.startswith("cycle:"):
            return cycle(int(t[6:]))
        if t.startswith("wheel:"):
            k, l = (int(x) for x in t[6:].split(","))
            return wheel(k, l)
        if t.startswith("custom:"):
            pairs = [tuple(int(x) for x in tok.split("-")) for tok in t[7:].split(",") if tok]
            if not pairs or any(len(pq) != 2 for pq in pairs):
                raise PatternError(f"bad custom edge list {text!r}")
            return MotifPattern.from_edges(pairs)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, PatternError):
            raise
        raise PatternError(f"cannot parse motif {text!r}") from exc
    raise PatternError(f"unknown motif {text!r}")


def _small(x) -> tuple[int, tuple]:
    """Coerce a MotifPattern, Graph or ``(p, edges)`` pair to ``(p, edges)``."""
    if isinstance(x, MotifPattern):
        return x.p, x.edges
    if hasattr(x, "edges") and hasattr(x, "n") and callable(x.edges):
        return x.n, tuple(map(tuple, x.edges().tolist()))
    p, edges = x
    return int(p), _normalize_edges(int(p), edges)


def automorphism_count(edges, p: int, limit: int | None = None) -> int:
    """Number of vertex permutations mapping the edge set onto itself."""
    _check_size(p, limit)
    es = _normalize_edges(p, edges)
    if not es:
        return math.factorial(p)
    imgs = _image_masks(p, es)
    return int(np.count_nonzero(imgs == np.uint64(edges_to_mask(es))))


def is_isomorphic(a, b, limit: int | None = None) -> bool:
    pa, ea = _small(a)
    pb, eb = _small(b)
    _check_size(max(pa, pb), limit)
    if pa != pb or len(ea) != len(eb):
        return False
    if sorted(_degrees(pa, ea)) != sorted(_degrees(pb, eb)):
        return False
    return _canonical(pa, ea) == _canonical(pb, eb)


def count_spanning_copies(r: MotifPattern, host) -> int:
    """Copies of ``r`` in ``host`` that use every host vertex."""
    ph, eh = _small(host)
    if ph != r.p:
        raise PatternError("host must have exactly r.p vertices")
    hm = np.uint64(edges_to_mask(eh))
    cm = r.copy_masks()
    return int(np.count_nonzero((cm & ~hm) == 0))


@dataclass(frozen=True)
class MergedPattern:
    """Isomorphism type of ``W = S ∪ T`` with ``S ≅ r1``, ``T ≅ r2``.

    ``multiplicity`` is the number of ordered pairs ``(S, T)`` whose union is
    one fixed labelled copy of ``W`` with ``|V(S) ∩ V(T)| == overlap``.
    """

    w: MotifPattern
    overlap: int
    multiplicity: int

    @property
    def p_w(self) -> int:
        return self.w.p

    @property
    def e_w(self) -> int:
        return self.w.e


def _copies_inside(r: MotifPattern, pw: int, wmask: int):
    """All copies of r inside a labelled graph on ``pw`` vertices: (vset, mask)."""
    out = []
    cm = [int(c) for c in r.copy_masks()]
    for verts in itertools.combinations(range(pw), r.p):
        remap = {}
        for j in range(1, r.p):
            for i in range(j):
                remap[pair_bit(i, j)] = pair_bit(verts[i], verts[j])
        for c in cm:
            m = 0
            b = c
            while b:
                low = b & -b
                m |= 1 << remap[low.bit_length() - 1]
                b ^= low
            if m & ~wmask == 0:
                out.append((frozenset(verts), m))
    return out


def _pair_multiplicity(r1, r2, pw, wmask, overlap) -> int:
    c1 = _copies_inside(r1, pw, wmask)
    c2 = c1 if r2 is r1 else _copies_inside(r2, pw, wmask)
    cnt = 0
    for v1, m1 in c1:
        for v2, m2 in c2:
            if m1 | m2 == wmask and len(v1 & v2) == overlap:
                cnt += 1
    return cnt


def _glue(r1: MotifPattern, r2: MotifPattern, overlap: int):
    """Labelled unions of r1 (on 0..p1-1) with a copy of r2 sharing ``overlap`` vertices."""
    p1, p2 = r1.p, r2.p
    pw = p1 + p2 - overlap
    new = list(range(p1, pw))
    seen = set()
    for shared_r2 in itertools.combinations(range(p2), overlap):
        rest = [v for v in range(p2) if v not in shared_r2]
        for targets in itertools.permutations(range(p1), overlap):
            phi = dict(zip(shared_r2, targets))
            phi.update(zip(rest, new))
            tm = edges_to_mask((phi[a], phi[b]) for a, b in r2.edges)
            wm = r1.mask | tm
            if wm not in seen:
                seen.add(wm)
                yield pw, wm


def _merged(r1: MotifPattern, r2: MotifPattern, overlaps, limit) -> list[MergedPattern]:
    out: list[MergedPattern] = []
    for k in overlaps:
        if not 1 <= k <= min(r1.p, r2.p):
            raise PatternError(f"overlap {k} out of range")
        pw = r1.p + r2.p - k
        _check_size(pw, limit)
        found: dict[tuple, list] = {}
        for _, wm in _glue(r1, r2, k):
            es = mask_to_edges(pw, wm)
            key = (len(es), tuple(sorted(_degrees(pw, es))), _canonical(pw, es))
            if key not in found:
                found[key] = [es, wm]
        for es, wm in found.values():
            mult = _pair_multiplicity(r1, r2, pw, wm, k)
            if mult == 0:
                continue
            w = MotifPattern.from_edges(es, pw, name=f"W[{r1.name}|{r2.name}|{k}]:{','.join(f'{a}-{b}' for a, b in es)}", limit=limit)
            out.append(MergedPattern(w, k, mult))
    return out


@lru_cache(maxsize=256)
def merged_patterns(r: MotifPattern, overlaps: tuple | None = None, limit: int | None = None) -> tuple:
    """Union types ``S ∪ T`` of two copies of ``r``.

    By default the overlaps are ``(1, p)``: the shared-vertex gluings and the
    unions of two copies on the same vertex set (including ``S == T``).
    """
    ks = (1, r.p) if overlaps is None else tuple(overlaps)
    return tuple(_merged(r, r, sorted(set(ks)), limit))


@lru_cache(maxsize=256)
def merged_patterns_cross(r1: MotifPattern, r2: MotifPattern, overlaps: tuple | None = None,
                          limit: int | None = None) -> tuple:
    """Union types ``S ∪ T`` with ``S ≅ r1`` and ``T ≅ r2`` (overlap 1 by default)."""
    ks = (1,) if overlaps is None else tuple(overlaps)
    return tuple(_merged(r1, r2, sorted(set(ks)), limit))
