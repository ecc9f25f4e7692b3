import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeid import AFFINE, CONNECTIONS, get_site
from cubeid import presheaf as ps
from cubeid.presheaf import BudgetError, PresheafError


@pytest.mark.parametrize("mode,dim", [(AFFINE, 3), (CONNECTIONS, 2)])
def test_yoneda_is_functorial(mode, dim):
    site = get_site(mode, dim)
    d = 2
    for g in range(0, len(site.src), 5):
        if site.tgt[g] > d or site.src[g] > d:
            continue
        for f in site.into[site.src[g]][: site.n_into(site.src[g], d)][::4]:
            lhs = ps.induced_map(site, site.compose(g, f), d)
            rhs = ps.induced_map(site, f, d).then(ps.induced_map(site, g, d))
            assert lhs.equals(rhs)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_yoneda_lemma_counts(affine3, n):
    # maps y(n) -> X are the level-n cells of X
    d = 2
    X = ps.product(ps.yoneda(affine3, 1, d), ps.discrete(affine3, d, 2))[0]
    homs = ps.enumerate_homs(ps.yoneda(affine3, n, d), X)
    assert len(homs) == X.size(n)
    assert sorted(h.comp[n][ps.yoneda(affine3, n, d).index(n, affine3.identity(n))] for h in homs) == list(
        range(X.size(n)))


def test_restrictions_are_functorial(affine3):
    for X in (ps.yoneda(affine3, 2, 3), ps.terminal(affine3, 3), ps.boundary(affine3, 3).to_object()[0]):
        assert X.functoriality_violations() == 0


def test_pullback_universal_property(affine3):
    d = 2
    I = ps.yoneda(affine3, 1, d)
    two = ps.discrete(affine3, d, 2)
    P, p0, p1 = ps.product(two, I)
    d0 = ps.induced_map(affine3, affine3.face(1, 1, 0), d, dom=ps.terminal(affine3, d), cod=I)
    Q, q0, q1 = ps.pullback(d0, p1)
    assert Q.sizes() == (2, 2, 2)
    assert ps.check_pullback_square(q1, q0, p1, d0).ok
    # the product square is a pullback over the point
    one = ps.terminal(affine3, d)
    assert ps.check_pullback_square(p1, p0, ps.terminal_map(I, one), ps.terminal_map(two, one)).ok
    # a commuting square that is not a pullback
    sq = ps.check_pullback_square(ps.terminal_map(two, one), ps.terminal_map(two, one), ps.identity(one),
                                  ps.identity(one))
    assert not sq.ok and sq.cones > 0


def test_product_sizes_are_levelwise(affine3):
    A = ps.yoneda(affine3, 1, 3)
    B = ps.yoneda(affine3, 2, 3)
    P, _, _ = ps.product(A, B)
    assert P.sizes() == tuple(a * b for a, b in zip(A.sizes(), B.sizes()))


def test_pushout_of_endpoints_glues_interval(affine3):
    d = 2
    one = ps.terminal(affine3, d)
    I = ps.yoneda(affine3, 1, d)
    d0 = ps.induced_map(affine3, affine3.face(1, 1, 0), d, dom=one, cod=I)
    d1 = ps.induced_map(affine3, affine3.face(1, 1, 1), d, dom=one, cod=I)
    # gluing two intervals end to start: 3 vertices, 2 + 3 edges counting degenerate ones
    Q, a, b = ps.pushout(d1, d0)
    assert Q.size(0) == 3
    assert ps.commutes((d1, a), (d0, b))
    assert Q.functoriality_violations() == 0


def test_boundary_counts(affine3):
    B = ps.boundary(affine3, 2, 3)
    Y = B.of
    assert B.is_closed()
    # only the identity-like cells of full rank are missing
    missing = [Y.size(n) - c for n, c in enumerate(B.counts())]
    assert missing[0] == 0 and missing[1] == 0 and missing[2] > 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 10_000)), min_size=0, max_size=4))
def test_generated_subpresheaves_are_closed(gens):
    site = get_site(AFFINE, 3)
    Y = ps.yoneda(site, 2, 2)
    gens = [(n, x % Y.size(n)) for n, x in gens]
    sub = ps.generated(Y, gens)
    assert sub.is_closed()
    for n, x in gens:
        assert sub.contains(n, x)
    S, incl = sub.to_object()
    assert incl.is_mono() and incl.naturality_violations() == 0


def test_enumerate_homs_limit(affine3):
    d = 1
    X = ps.discrete(affine3, d, 3)
    Y = ps.discrete(affine3, d, 3)
    assert len(ps.enumerate_homs(X, Y)) == 27
    with pytest.raises(PresheafError):
        ps.enumerate_homs(X, Y, limit=5)
    assert len(ps.enumerate_homs(X, Y, limit=5, strict=False)) == 5


def test_map_checks(affine3):
    X = ps.discrete(affine3, 1, 2)
    I = ps.yoneda(affine3, 1, 1)
    with pytest.raises(PresheafError):
        # sending both points to the interior edge's endpoints inconsistently is not natural
        ps.PresheafMap(I, X, [np.asarray([0, 1]), np.asarray([0, 0, 0])])
    with pytest.raises(BudgetError):
        ps.PresheafMap(X, ps.discrete(affine3, 2, 2), [np.zeros(2), np.zeros(2)])


def test_find_iso_and_image(affine3):
    d = 2
    A = ps.yoneda(affine3, 1, d)
    B = ps.yoneda(affine3, 1, d)
    iso = ps.find_iso(A, B)
    assert iso is not None and iso.is_iso()
    f = ps.terminal_map(A, ps.terminal(affine3, d))
    assert f.image().counts() == (1, 1, 1)
    assert ps.find_iso(A, ps.discrete(affine3, d, 2)) is None


def test_from_table_reports_missing_restriction(affine3):
    with pytest.raises(PresheafError):
        ps.from_table(affine3, 1, [["a"], ["e"]], {})
