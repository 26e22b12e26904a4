"""Numba kernels for ESU / RAND-ESU leaf processing.

The graph passed in here is relabelled so that vertex id equals its
AssignOrder rank; "u after v" is then just ``u > v``.

Randomness is a splitmix64 stream keyed by ``(seed, iterate, root)``, so a
root's subtree draws the same coins no matter how roots are batched.
"""

import math

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@nb.njit(cache=True)
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def stream_state(seed, iterate, root):
    s = _mix(np.uint64(seed) + _GOLDEN)
    s = _mix(s ^ (np.uint64(iterate) + _GOLDEN))
    return _mix(s ^ (np.uint64(root) * _GOLDEN + np.uint64(1)))


@nb.njit(cache=True)
def _uniform(state):
    """Advance state[0]; return a double in (0, 1]."""
    state[0] += _GOLDEN
    z = _mix(state[0])
    return ((z >> np.uint64(11)) + np.uint64(1)) * (1.0 / 9007199254740992.0)


@nb.njit(cache=True)
def _skip(state, logq):
    # failures before the next success of a Bernoulli(q) coin; logq = log(1-q)
    if logq == 0.0:
        return 0
    if logq == -np.inf:
        return 1 << 60
    return int(math.floor(math.log(_uniform(state)) / logq))


@nb.njit(cache=True)
def build_table(copies, nbits):
    """``t[m]`` = number of masks in ``copies`` that are subsets of ``m``."""
    size = 1 << nbits
    t = np.zeros(size, dtype=np.int32)
    for c in copies:
        t[c] += 1
    for b in range(nbits):
        bit = 1 << b
        for m in range(size):
            if m & bit:
                t[m] += t[m ^ bit]
    return t


@nb.njit(cache=True, nogil=True)
def esu_run(indptr, indices, p, logq, root_lo, root_hi, seed, iterate,
            use_table, tables, copies, ncopies, counts, stats,
            collect, leaf_buf, leaf_w):
    """Walk the (randomised) ESU forest for roots in ``[root_lo, root_hi)``.

    counts[j]  += copies of pattern j spanning each visited leaf
    stats[0]   += leaves visited, stats[1] += leaves holding any copy,
    stats[2]   += leaves that did not fit in ``leaf_buf``.
    collect: 0 none, 1 every leaf, 2 leaves holding any copy; the per-pattern
    copy counts of written leaves go to ``leaf_w``.
    Returns the number of leaves written to ``leaf_buf``.
    """
    n = indptr.shape[0] - 1
    npat = counts.shape[0]
    maxdeg = 0
    for v in range(n):
        d = indptr[v + 1] - indptr[v]
        if d > maxdeg:
            maxdeg = d
    cap = p * maxdeg + 1
    ext = np.empty((p + 1, cap), dtype=np.int32)
    extlen = np.zeros(p + 1, dtype=np.int64)
    pos = np.zeros(p + 1, dtype=np.int64)
    sub = np.empty(p, dtype=np.int32)
    cmask = np.zeros(p + 1, dtype=np.uint64)
    excl = np.zeros(n, dtype=np.int32)
    nbm = np.zeros(n, dtype=np.uint16)  # bit j set: adjacent to sub[j]
    state = np.zeros(1, dtype=np.uint64)
    cur = np.zeros(npat, dtype=np.int64)
    nbuf = leaf_buf.shape[0]
    written = 0

    for v in range(root_lo, root_hi):
        state[0] = stream_state(seed, iterate, v)
        if logq[0] != 0.0:
            if _skip(state, logq[0]) > 0:
                continue
        sub[0] = v
        depth = 0
        if p > 1:
            excl[v] += 1
            for k in range(indptr[v], indptr[v + 1]):
                excl[indices[k]] += 1
                nbm[indices[k]] |= np.uint16(1)
            L = 0
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if u > v:
                    ext[1, L] = u
                    L += 1
            extlen[1] = L
            depth = 1
            pos[1] = _skip(state, logq[1])
            cmask[1] = np.uint64(0)
        while depth >= 0:
            if depth == 0:
                if p > 1:
                    break
                # a single vertex is its own leaf
                m = np.uint64(0)
                depth = -1
            else:
                i = pos[depth]
                if i >= extlen[depth]:
                    w = sub[depth - 1]
                    clear = ~np.uint16(1 << (depth - 1))
                    excl[w] -= 1
                    for k in range(indptr[w], indptr[w + 1]):
                        excl[indices[k]] -= 1
                        nbm[indices[k]] &= clear
                    depth -= 1
                    continue
                w = ext[depth, i]
                pos[depth] = i + 1 + _skip(state, logq[depth])
                bits = np.uint64(nbm[w])
                m = cmask[depth] | (bits << np.uint64(depth * (depth - 1) // 2))
                sub[depth] = w
                if depth + 1 < p:
                    # child extension: remaining candidates plus exclusive neighbours of w
                    a = i + 1
                    a_end = extlen[depth]
                    b = indptr[w]
                    b_end = indptr[w + 1]
                    L = 0
                    while True:
                        while b < b_end and (indices[b] <= v or excl[indices[b]] != 0):
                            b += 1
                        if a < a_end and (b >= b_end or ext[depth, a] < indices[b]):
                            ext[depth + 1, L] = ext[depth, a]
                            a += 1
                        elif b < b_end:
                            ext[depth + 1, L] = indices[b]
                            b += 1
                        else:
                            break
                        L += 1
                    extlen[depth + 1] = L
                    setb = np.uint16(1 << depth)
                    excl[w] += 1
                    for k in range(indptr[w], indptr[w + 1]):
                        excl[indices[k]] += 1
                        nbm[indices[k]] |= setb
                    depth += 1
                    cmask[depth] = m
                    pos[depth] = _skip(state, logq[depth])
                    continue
            # leaf: sub[0..p-1] with pair mask m
            stats[0] += 1
            hit = False
            for j in range(npat):
                if use_table:
                    c = tables[j, m]
                else:
                    c = 0
                    for t in range(ncopies[j]):
                        if copies[j, t] & ~m == 0:
                            c += 1
                counts[j] += c
                cur[j] = c
                if c > 0:
                    hit = True
            if hit:
                stats[1] += 1
            if collect == 1 or (collect == 2 and hit):
                if written < nbuf:
                    for j in range(p):
                        leaf_buf[written, j] = sub[j]
                    for j in range(npat):
                        leaf_w[written, j] = cur[j]
                    written += 1
                else:
                    stats[2] += 1
    return written


@nb.njit(cache=True, nogil=True)
def subset_codes(leaves, combos, n):
    """Mixed-radix code of every ``combos`` subset of every (sorted) leaf."""
    L = leaves.shape[0]
    C = combos.shape[0]
    s = combos.shape[1]
    out = np.empty(L * C, dtype=np.int64)
    for i in range(L):
        for c in range(C):
            code = 0
            for t in range(s):
                code = code * n + leaves[i, combos[c, t]]
            out[i * C + c] = code
    return out


@nb.njit(cache=True, nogil=True)
def scatter_rows(index, W, C, cols, out):
    """``out[index[k], cols[j]] += W[k // C, j]``."""
    for k in range(index.shape[0]):
        row = index[k]
        i = k // C
        for j in range(cols.shape[0]):
            out[row, cols[j]] += W[i, j]
