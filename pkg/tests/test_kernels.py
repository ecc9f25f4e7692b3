import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeid import kernels
from cubeid import presheaf as ps

small = st.integers(0, 5)
codes = st.lists(small, max_size=12).map(lambda v: np.asarray(v, dtype=np.int64))


@settings(max_examples=100, deadline=None)
@given(codes, codes)
def test_join_codes(fa, gb):
    want = [(i, j) for i in range(len(fa)) for j in range(len(gb)) if fa[i] == gb[j]]
    for fn in (kernels.join_codes, kernels.numpy_kernels["join_codes"]):
        ii, jj = fn(fa, gb)
        assert sorted(zip(ii.tolist(), jj.tolist())) == want


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))))
def test_union_find_roots_are_component_minima(case):
    n, edges = case
    a = np.asarray([e[0] for e in edges], dtype=np.int64)
    b = np.asarray([e[1] for e in edges], dtype=np.int64)
    # reference: repeated relabelling to the smallest reachable index
    label = list(range(n))
    changed = True
    while changed:
        changed = False
        for x, y in edges:
            m = min(label[x], label[y])
            if label[x] != m or label[y] != m:
                label[x] = label[y] = m
                changed = True
    for fn in (kernels.union_find, kernels.numpy_kernels["union_find"]):
        assert fn(n, a, b).tolist() == label


def tables(X):
    """Arguments of the functoriality kernel for every level pair of ``X``."""
    site = X.site
    for n in range(X.trunc + 1):
        cols = site.into[n][: site.n_into(n, X.trunc)]
        for m in range(X.trunc + 1):
            g, f, gf = [], [], []
            for j, gg in enumerate(cols):
                if site.src[gg] != m:
                    continue
                inner = site.into[m][: site.n_into(m, X.trunc)]
                for k, ff in enumerate(inner):
                    g.append(j)
                    f.append(k)
                    gf.append(cols.index(site.compose(gg, ff)))
            if g:
                g, f, gf = (np.asarray(v, dtype=np.int64) for v in (g, f, gf))
                yield X.R[n], X.R[m], g, f, gf, np.arange(g.size, dtype=np.int64)


@pytest.mark.parametrize("corrupt", [False, True])
def test_functoriality_paths_agree(affine3, corrupt):
    X = ps.yoneda(affine3, 2, 2)
    R = [r.copy() for r in X.R]
    if corrupt:
        R[2][3, 1] = (R[2][3, 1] + 1) % X.size(1)
    Y = ps.CubicalSet(affine3, 2, X.keys, R, check=False)
    total = {"jit": 0, "np": 0}
    for args in tables(Y):
        total["jit"] += kernels.functoriality_violations(*args)
        total["np"] += kernels.numpy_kernels["functoriality_violations"](*args)
    assert total["jit"] == total["np"]
    assert (total["np"] > 0) == corrupt


def test_naturality_paths_agree(affine3):
    d = 2
    X = ps.yoneda(affine3, 1, d)
    one = ps.terminal(affine3, d)
    f = ps.terminal_map(X, one)
    site = affine3
    comp_all = np.concatenate(f.comp)
    offs = np.cumsum([0] + [c.size for c in f.comp])
    for n in range(d + 1):
        cols = site.into[n][: site.n_into(n, d)]
        col_off = np.asarray([offs[site.src[g]] for g in cols], dtype=np.int64)
        args = (f.comp[n], comp_all, col_off, X.R[n], one.R[n])
        assert kernels.naturality_violations(*args) == kernels.numpy_kernels["naturality_violations"](*args) == 0
        broken = comp_all.copy()
        broken[:] = 1
        args = (f.comp[n], broken, col_off, X.R[n], one.R[n])
        assert kernels.naturality_violations(*args) == kernels.numpy_kernels["naturality_violations"](*args) > 0
