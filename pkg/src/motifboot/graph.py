"""Undirected simple graphs stored in CSR form.

Vertices are ``0..n-1``. Neighbour lists are sorted, so adjacency tests are a
binary search and neighbour iteration is a contiguous slice. Graphs never
change after construction and can be shared freely between workers.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, TextIO

import numpy as np

log = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Raised for unreadable edge-list input."""


class Graph:
    """Immutable undirected simple graph.

    Parameters
    ----------
    n : int
        Number of vertices.
    indptr, indices : ndarray
        CSR adjacency. ``indices[indptr[v]:indptr[v+1]]`` are the sorted
        neighbours of ``v``. Callers normally use :meth:`from_edges`.
    labels : sequence of str, optional
        Original vertex labels, kept only for reporting.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray, labels=None):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.labels = None if labels is None else tuple(labels)

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> "Graph":
        """Build from an iterable or ``(k, 2)`` array of vertex pairs.

        Self-loops and duplicate edges are dropped silently; use
        :func:`load_edge_list` when the counts matter.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        key = np.unique(lo * n + hi)
        lo, hi = key // n, key % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst.astype(np.int32), labels)

    @classmethod
    def from_adjacency(cls, adj) -> "Graph":
        a = np.asarray(adj)
        i, j = np.nonzero(np.triu(a, 1))
        return cls.from_edges(a.shape[0], np.column_stack([i, j]))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_edges(self) -> int:
        return int(self.indices.size // 2)

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors_of(u)
        k = np.searchsorted(nb, v)
        return bool(k < nb.size and nb[k] == v)

    def edges(self) -> np.ndarray:
        """``(|E|, 2)`` array of edges with ``u < v``, in sorted order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        dst = self.indices.astype(np.int64)
        keep = src < dst
        return np.column_stack([src[keep], dst[keep]])

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        e = self.edges()
        a[e[:, 0], e[:, 1]] = 1
        a[e[:, 1], e[:, 0]] = 1
        return a

    def relabel(self, perm: np.ndarray) -> "Graph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        e = self.edges()
        return Graph.from_edges(self.n, perm[e])

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True)
class LoadReport:
    """What :func:`load_edge_list` had to clean up."""

    duplicates: int = 0
    self_loops: int = 0
    label_map: dict = field(default_factory=dict)


def _split(line: str, fmt: str) -> list[str]:
    if fmt == "csv" or (fmt == "auto" and "," in line):
        return [t.strip() for t in next(csv.reader([line]))]
    return line.split()


def load_edge_list(source: TextIO | str, fmt: str = "auto") -> tuple[Graph, LoadReport]:
    """Read an edge list, one edge per line.

    Labels are arbitrary strings and get dense ids in order of first
    appearance. Blank lines and lines starting with ``#`` are skipped.
    Duplicate edges are collapsed and self-loops dropped; both are counted
    in the returned :class:`LoadReport`.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    ids: dict[str, int] = {}
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    dups = loops = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = _split(line, fmt)
        if len(toks) != 2 or not all(toks):
            raise EdgeListError(f"line {lineno}: expected two labels, got {line!r}")
        u = ids.setdefault(toks[0], len(ids))
        v = ids.setdefault(toks[1], len(ids))
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
        edges.append(key)
    if not ids:
        raise EdgeListError("empty edge list")
    if loops:
        log.warning("dropped %d self-loop(s)", loops)
    labels = list(ids)
    g = Graph.from_edges(len(ids), edges if edges else np.empty((0, 2)), labels)
    return g, LoadReport(dups, loops, ids)


def write_edge_list(g: Graph, out: TextIO, use_labels: bool = True) -> None:
    lab = g.labels if (use_labels and g.labels is not None) else None
    for u, v in g.edges():
        if lab is None:
            out.write(f"{u} {v}\n")
        else:
            out.write(f"{lab[u]} {lab[v]}\n")


def _as_vertex_set(g: Graph, s: Iterable[int]) -> np.ndarray:
    arr = np.unique(np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64))
    if arr.size == 0:
        raise ValueError("vertex set must be nonempty")
    if arr[0] < 0 or arr[-1] >= g.n:
        raise ValueError("vertex id out of range")
    return arr


def induced_subgraph(g: Graph, s: Sequence[int]) -> Graph:
    """Subgraph induced by ``s``; vertex ``s_sorted[i]`` becomes ``i``."""
    verts = _as_vertex_set(g, s)
    newid = np.full(g.n, -1, dtype=np.int64)
    newid[verts] = np.arange(verts.size)
    e = g.edges()
    if e.size:
        a, b = newid[e[:, 0]], newid[e[:, 1]]
        keep = (a >= 0) & (b >= 0)
        e = np.column_stack([a[keep], b[keep]])
    labels = None if g.labels is None else [g.labels[v] for v in verts]
    return Graph.from_edges(verts.size, e, labels)


def neighbors(g: Graph, s: Iterable[int]) -> np.ndarray:
    """Open neighbourhood of a vertex set: the union of N(v) minus ``s``."""
    verts = _as_vertex_set(g, s)
    nb = np.concatenate([g.neighbors_of(v) for v in verts]).astype(np.int64)
    return np.setdiff1d(nb, verts)
