from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeid import AFFINE, CARTESIAN, CONNECTIONS, get_site
from cubeid.site import (ONE, ZERO, SiteError, SiteMorphism, join, meet, parse_term, show_term, site_compose,
                         substitute, var)


def holds(t, bits):
    return any(all(bits[i - 1] for i in clause) for clause in t)


def truth_table(t, n):
    """A lattice term as a monotone boolean function on ``n`` variables."""
    return tuple(holds(t, bits) for bits in product((0, 1), repeat=n))


@pytest.mark.parametrize("mode,dim", [(AFFINE, 3), (CARTESIAN, 2), (CONNECTIONS, 2)])
def test_identity_and_associativity(mode, dim):
    site = get_site(mode, dim)
    for g in range(len(site.src)):
        assert site.compose(g, site.identity(site.src[g])) == g
        assert site.compose(site.identity(site.tgt[g]), g) == g
    for h in range(0, len(site.src), 7):
        for g in site.into[site.src[h]][::3]:
            for f in site.into[site.src[g]][::5]:
                assert site.compose(h, site.compose(g, f)) == site.compose(site.compose(h, g), f)


@pytest.mark.parametrize("mode,dim", [(AFFINE, 3), (CONNECTIONS, 2)])
def test_site_compose_matches_table(mode, dim):
    site = get_site(mode, dim)
    for a in range(0, len(site.src), 3):
        for b in site.hom.get((site.tgt[a], 1), []) + site.hom.get((site.tgt[a], 2), []):
            m = site_compose(site.morphism(a), site.morphism(b), mode)
            assert m == site.morphism(site.compose(b, a))


def test_site_compose_examples():
    f = SiteMorphism(1, 1, (var(1),))
    g = SiteMorphism(0, 1, (ZERO,))
    assert site_compose(g, f).coords == (ZERO,)
    idt = SiteMorphism(2, 2, (var(1), var(2)))
    h = SiteMorphism(1, 2, (var(1), ONE))
    assert site_compose(h, idt) == h


def test_site_compose_connections_normalizes():
    # v1 -> max(v1, v2) substituted into min(v1, 1)
    f = SiteMorphism(2, 1, (join(var(1), var(2)),))
    g = SiteMorphism(1, 1, (meet(var(1), ONE),))
    assert site_compose(f, g, CONNECTIONS).coords == (join(var(1), var(2)),)


def test_site_compose_errors():
    with pytest.raises(SiteError):
        site_compose(SiteMorphism(0, 1, (ZERO,)), SiteMorphism(2, 1, (var(1),)))
    # a diagonal is not affine
    diag = SiteMorphism(1, 2, (var(1), var(1)))
    with pytest.raises(SiteError):
        site_compose(SiteMorphism(1, 1, (var(1),)), diag, AFFINE)


terms2 = st.recursive(st.sampled_from([ZERO, ONE, var(1), var(2), var(3)]),
                      lambda sub: st.tuples(st.sampled_from([meet, join]), sub, sub).map(lambda t: t[0](t[1], t[2])),
                      max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(terms2, terms2, terms2)
def test_normal_forms_agree_with_truth_tables(a, b, c):
    # the free bounded distributive lattice is monotone boolean functions
    for t1, t2 in ((meet(a, join(b, c)), join(meet(a, b), meet(a, c))), (meet(a, a), a), (join(a, meet(a, b)), a)):
        assert truth_table(t1, 3) == truth_table(t2, 3)
        assert t1 == t2
    sub = substitute(a, (b, c, a))
    for bits in product((0, 1), repeat=3):
        assert holds(sub, bits) == holds(a, (holds(b, bits), holds(c, bits), holds(a, bits)))


@settings(max_examples=100, deadline=None)
@given(terms2)
def test_term_print_parse_roundtrip(t):
    assert parse_term(show_term(t)) == t


@pytest.mark.parametrize("mode,dim", [(AFFINE, 3), (CONNECTIONS, 2)])
def test_truncation_is_a_prefix(mode, dim):
    site = get_site(mode, dim)
    for n in range(dim + 1):
        srcs = [site.src[g] for g in site.into[n]]
        assert srcs == sorted(srcs)
        for d in range(dim + 1):
            assert all(site.src[g] <= d for g in site.into[n][: site.n_into(n, d)])


def test_affine_hom_counts():
    site = get_site(AFFINE, 3)
    # maps 1 -> 1: 0, 1, v1; maps 2 -> 2 without repeated variables
    assert len(site.hom[(1, 1)]) == 3
    assert len(site.hom[(2, 2)]) == 14
