"""Array kernels for table checks, with a numba path and a numpy path.

Set ``CUBEID_NO_JIT=1`` to force the pure-numpy implementations.  Both
paths return identical results; ``benchmarks/bench_kernels.py`` compares
their speed.
"""
from __future__ import annotations

import os

import numpy as np

USE_JIT = os.environ.get("CUBEID_NO_JIT", "0") not in ("1", "true", "yes")

if USE_JIT:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_JIT = False


# ---------------------------------------------------------------- numpy ---

def _functoriality_violations_np(r_n, r_mid, g_col, f_col, gf_col, sel):
    """Count (cell, pair) with r_mid[r_n[x, g], f] != r_n[x, gf].

    ``sel`` masks the pairs whose middle level is the one ``r_mid`` belongs to.
    """
    if r_n.shape[0] == 0 or sel.size == 0:
        return 0
    g, f, gf = g_col[sel], f_col[sel], gf_col[sel]
    mid = r_n[:, g]
    lhs = r_mid[mid, f[None, :]]
    rhs = r_n[:, gf]
    return int(np.count_nonzero(lhs != rhs))


def _naturality_violations_np(comp_n, comp_all, col_off, rd_n, rc_n):
    """Count (x, col) with comp_src[rd_n[x, c]] != rc_n[comp_n[x], c].

    ``comp_all`` concatenates the levelwise components; ``col_off[c]`` is the
    offset of the source level of column ``c``.
    """
    if rd_n.shape[0] == 0:
        return 0
    ncol = rd_n.shape[1]
    lhs = comp_all[col_off[None, :ncol] + rd_n]
    rhs = rc_n[comp_n, :ncol]
    return int(np.count_nonzero(lhs != rhs))


def _uf_find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


def _union_find_np(n, a, b):
    parent = np.arange(n, dtype=np.int64)
    for k in range(a.shape[0]):
        ra = _uf_find(parent, a[k])
        rb = _uf_find(parent, b[k])
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    for i in range(n):
        parent[i] = _uf_find(parent, i)
    return parent


def _join_codes_np(fa, gb):
    """All pairs (i, j) with fa[i] == gb[j], sorted by (i, j)."""
    order = np.argsort(gb, kind="stable")
    sg = gb[order]
    lo = np.searchsorted(sg, fa, side="left")
    hi = np.searchsorted(sg, fa, side="right")
    counts = hi - lo
    ii = np.repeat(np.arange(fa.shape[0], dtype=np.int64), counts)
    starts = np.repeat(lo, counts)
    offs = np.arange(ii.shape[0], dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    jj = order[starts + offs]
    return ii, jj


# ---------------------------------------------------------------- numba ---

if USE_JIT:

    @njit(cache=True)
    def _functoriality_violations_jit(r_n, r_mid, g_col, f_col, gf_col, sel):
        bad = 0
        for x in range(r_n.shape[0]):
            for k in sel:
                if r_mid[r_n[x, g_col[k]], f_col[k]] != r_n[x, gf_col[k]]:
                    bad += 1
        return bad

    @njit(cache=True)
    def _naturality_violations_jit(comp_n, comp_all, col_off, rd_n, rc_n):
        bad = 0
        for x in range(rd_n.shape[0]):
            y = comp_n[x]
            for c in range(rd_n.shape[1]):
                if comp_all[col_off[c] + rd_n[x, c]] != rc_n[y, c]:
                    bad += 1
        return bad

    @njit(cache=True)
    def _union_find_jit(n, a, b):
        parent = np.arange(n)
        for k in range(a.shape[0]):
            ra = a[k]
            while parent[ra] != ra:
                ra = parent[ra]
            rb = b[k]
            while parent[rb] != rb:
                rb = parent[rb]
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
        for i in range(n):
            r = i
            while parent[r] != r:
                r = parent[r]
            parent[i] = r
        return parent

    @njit(cache=True)
    def _join_codes_jit(fa, gb):
        order = np.argsort(gb, kind="mergesort")
        sg = gb[order]
        total = 0
        for i in range(fa.shape[0]):
            total += np.searchsorted(sg, fa[i], side="right") - np.searchsorted(sg, fa[i], side="left")
        ii = np.empty(total, dtype=np.int64)
        jj = np.empty(total, dtype=np.int64)
        k = 0
        for i in range(fa.shape[0]):
            lo = np.searchsorted(sg, fa[i], side="left")
            hi = np.searchsorted(sg, fa[i], side="right")
            for p in range(lo, hi):
                ii[k] = i
                jj[k] = order[p]
                k += 1
        return ii, jj

    functoriality_violations = _functoriality_violations_jit
    naturality_violations = _naturality_violations_jit
    union_find = _union_find_jit
    join_codes = _join_codes_jit
else:
    functoriality_violations = _functoriality_violations_np
    naturality_violations = _naturality_violations_np
    union_find = _union_find_np
    join_codes = _join_codes_np

numpy_kernels = {
    "functoriality_violations": _functoriality_violations_np,
    "naturality_violations": _naturality_violations_np,
    "union_find": _union_find_np,
    "join_codes": _join_codes_np,
}
