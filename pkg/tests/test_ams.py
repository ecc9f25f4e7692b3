import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeid import ams
from cubeid import lifting as lf
from cubeid import pathobj as po
from cubeid import presheaf as ps
from cubeid.ams import FINSET, FinMap, SlotError
from cubeid.cli import ams_agreement

finmaps = st.integers(0, 4).flatmap(
    lambda n: st.integers(1, 4).flatmap(
        lambda m: st.tuples(*[st.integers(0, m - 1)] * n).map(lambda t: FinMap(n, m, t))))


@settings(max_examples=50, deadline=None)
@given(finmaps)
def test_degenerate_round_trip(f):
    pre, swe = ams.degenerate_instance()
    w = ams.swe_from_ftfactor(pre, swe, f, ams.UNIT)
    assert swe.project(w) == f
    assert ams.ftfactor_from_swe(pre, swe, f, w) == ams.UNIT
    assert pre.cof.check(f) and pre.tcof.check(f)
    assert pre.comparison_commutes(f)


@settings(max_examples=50, deadline=None)
@given(finmaps)
def test_degenerate_very_good_path_object(f):
    pre, swe = ams.degenerate_instance()
    vg = ams.strfromwk(pre, swe, ams.degenerate_paths(), f, ams.UNIT)
    diag, pairs = ams.finset_diagonal(f)
    # p . refl is the diagonal into the kernel pairs
    assert FINSET.compose(vg.p, vg.refl) == diag
    assert vg.steps


def test_three_for_two_needs_exactly_two():
    pre, swe = ams.degenerate_instance()
    f = FinMap(1, 1, (0,))
    w = ams.WeStructure(f, ams.UNIT)
    with pytest.raises(SlotError):
        swe.three_for_two(f, f, {1: w})
    with pytest.raises(SlotError):
        swe.three_for_two(f, f, {1: w, 2: w, 3: w})
    assert swe.three_for_two(f, f, {1: w, 2: w}).map == f


def test_missing_slot():
    swe = ams.SweCategory(project=lambda w: w.map)
    with pytest.raises(SlotError):
        swe.slot("tcof_from_cof")


def test_cubical_slots_that_are_not_operational(aff_world):
    pre, swe = ams.cubical_instance()
    with pytest.raises(SlotError):
        ams.ftfactor_from_swe(pre, swe, aff_world.id1, ams.WeStructure(aff_world.id1, None, "tfib"))
    with pytest.raises(SlotError):
        swe.three_for_two(aff_world.id1, aff_world.id1, {1: ams.WeStructure(aff_world.id1), 2: ams.WeStructure(
            aff_world.id1)})
    with pytest.raises(SlotError):
        # no structure registered for the map
        pre.tcof.right_structure(pre.tcof.factor(aff_world.bang2))


def test_cubical_engines(aff_world):
    f = aff_world.bang2.truncate(2)
    g = lf.search_fib(f)
    pre, swe = ams.cubical_instance({id(f): g})
    assert pre.cof.check(f) and pre.tcof.check(f)
    assert pre.comparison_commutes(f)
    assert pre.tcof.right_structure(pre.tcof.factor(f)) is g


@pytest.mark.parametrize("name", ["1->1", "2->1"])
def test_strfromwk_agrees_with_identity_type(aff_world, name):
    idt, fib = aff_world.id_type(name)
    for check, _, ok in ams_agreement(idt, fib):
        assert ok, check


def test_cubical_paths_need_a_fibration(aff_world):
    pre, swe = ams.cubical_instance()
    with pytest.raises(SlotError):
        ams.strfromwk(pre, swe, ams.cubical_paths(), aff_world.id1, None)


def test_retract_tfib(aff_world):
    w = aff_world
    # 1 -> 1 is a retract of 2 -> 1 over the point
    pt = ps.map_from_function(w.one, w.two, lambda n, x: w.two.restrict(w.site.hom[(n, 0)][0], 0))
    t = lf.search_tfib(w.bang2)
    r = ams.retract_ftalg(pt, w.bang2, w.id1, t, ams.retract_tfib)
    c = lf.cof(ps.empty_map(w.one))
    assert r.fill(c, ps.empty_map(w.one), w.id1).equals(w.id1)
    with pytest.raises(lf.LiftError):
        ams.retract_tfib(t, pt, ps.terminal_map(w.two, w.one), w.bang2)


def test_pointwise_over_walking_arrow(aff_world):
    w = aff_world
    A = ams.walking_arrow()
    f = w.bang2.truncate(2)
    g = w.id1.truncate(2)
    one, two = g.dom, f.dom
    pt = ps.map_from_function(one, two, lambda n, x: two.restrict(w.site.hom[(n, 0)][0], 1))
    dom = ams.Diagram(A, {"0": one, "1": two}, {"u": pt})
    cod = ams.Diagram(A, {"0": one, "1": one}, {"u": g})
    m = ams.DiagramMap(dom, cod, {"0": g, "1": f})
    pre, _ = ams.cubical_instance()
    fac = ams.pointwise_lift(pre.cof, A)(m)
    assert all(fac.naturality.values())
    assert set(fac.naturality) == {"id_0", "id_1", "u"}
    for a in A.objects:
        assert fac.left.components[a].then(fac.right.components[a]).equals(m.components[a])


def test_pointwise_over_terminal_category():
    pre, _ = ams.degenerate_instance()
    T = ams.terminal_category()
    f = FinMap(2, 1, (0, 0))
    d = ams.Diagram(T, {"*": 2}, {})
    e = ams.Diagram(T, {"*": 1}, {})
    fac = ams.pointwise_lift(pre.cof, T)(ams.DiagramMap(d, e, {"*": f}))
    assert fac.right.components["*"] == f and all(fac.naturality.values())


def test_pointwise_needs_square_functoriality():
    eng = ams.Engine("bare", FINSET, lambda f: ams.Factorization(f, FINSET.identity(f.dom), f),
                     lambda fac: None, lambda fac: None)
    A = ams.walking_arrow()
    f = FinMap(1, 1, (0,))
    d = ams.Diagram(A, {"0": 1, "1": 1}, {"u": f})
    with pytest.raises(SlotError):
        ams.pointwise_lift(eng, A)(ams.DiagramMap(d, d, {"0": f, "1": f}))


def test_very_good_path_object_fibration(aff_world):
    pre, swe = ams.cubical_instance()
    f = aff_world.P1
    vg = ams.strfromwk(pre, swe, ams.cubical_paths(), f, lf.search_fib(f))
    assert vg.p_fib.map.equals(vg.p)
    assert ps.commutes((vg.refl, vg.p), (po.mapping_path_space(f).r, po.mapping_path_space(f).pf))
