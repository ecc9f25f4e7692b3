import pytest

from cubeid import axioms as ax
from cubeid import lifting as lf
from cubeid import presheaf as ps
from cubeid.lifting import LiftError
from cubeid.presheaf import BudgetError


def const(A, B, cell):
    """``A -> B`` onto the degeneracies of the vertex ``cell``."""
    site = A.site
    return ps.map_from_function(A, B, lambda n, x: B.restrict(site.hom[(n, 0)][0], cell))


@pytest.fixture(scope="module")
def w2(affine3):
    from conftest import World
    return World(affine3, 2)


def test_identity_tfib_fills_with_the_bottom_map(w2):
    t = lf.tfib_identity(w2.I.carrier)
    c = lf.cof(w2.I.bdry)
    v = ps.identity(w2.I.carrier)
    filler = t.fill(c, w2.I.bdry, v)
    assert filler.equals(v)


def test_search_tfib_picks_a_point(w2):
    t = lf.search_tfib(w2.bang2)
    filler = t.fill(lf.cof(ps.empty_map(w2.one)), ps.empty_map(w2.two), w2.id1)
    assert filler.then(w2.bang2).equals(w2.id1)


def test_search_tfib_fails_on_disconnected_boundary(w2):
    # the two ends of I sent to different points of 2 have no extension
    t = lf.search_tfib(w2.bang2)
    u = ps.find_iso(w2.I.ends, w2.two)
    with pytest.raises(LiftError):
        t.fill(lf.cof(w2.I.bdry), u, ps.terminal_map(w2.I.carrier, w2.one))


def test_box_strategy_against_constant_fibration(w2):
    # d0 against 2 -> 1: the open box is constant, so is its filler
    c = lf.cof(w2.I.endpoint(0))
    strat = lf.cof_to_tcof_box(c, 0, w2.I)
    assert strat.map.is_mono() and strat.loss == 1
    g = lf.search_fib(w2.bang2)
    u = const(strat.map.dom, w2.two, 1)
    v = ps.terminal_map(strat.map.cod, w2.one)
    filler = lf.solve_lift(strat, g, u, v)
    assert filler.trunc == w2.d - 1
    assert filler.equals(const(strat.map.cod.truncate(w2.d - 1), w2.two.truncate(w2.d - 1), 1))


def test_solve_lift_rejects_non_commuting_square(w2):
    strat = lf.identity_strategy(w2.two)
    g = lf.fib_identity(w2.two)
    swap = ps.map_from_function(w2.two, w2.two, lambda n, x: 1 - x)
    with pytest.raises(LiftError):
        lf.solve_lift(strat, g, ps.identity(w2.two), swap)
    assert lf.solve_lift(strat, g, swap, swap).equals(swap)


def test_fib_identity_and_compose(w2):
    g = lf.search_fib(w2.P1)
    h = lf.fib_compose(g, lf.fib_identity(w2.I.carrier))
    assert h.map.equals(w2.P1)
    strat = lf.cof_to_tcof_box(lf.cof(ps.empty_map(w2.one)), 1, w2.I)
    tw = strat.tensor
    # a square from the corner into 2xI over the projection to I
    u = ps.pairing(w2.P, const(strat.map.dom, w2.two, 0), strat.map.then(tw.pr1))
    v = tw.pr1
    a = lf.solve_lift(strat, g, u, v)
    b = lf.solve_lift(strat, h, u, v)
    assert a.equals(b)


def test_fib_pullback_along_identity(w2):
    g = lf.search_fib(w2.bang2)
    pb = lf.fib_pullback(g, ps.identity(w2.two), w2.bang2, w2.id1)
    assert pb.map.equals(w2.bang2)
    with pytest.raises(LiftError):
        # a commuting square that is not a pullback
        lf.fib_pullback(lf.search_fib(w2.id1), w2.bang2, w2.bang2, w2.id1)


def test_tfib_to_fib_fills_boxes(w2):
    t = lf.search_tfib(w2.id1)
    g = lf.tfib_to_fib(t)
    strat = lf.cof_to_tcof_box(lf.cof(w2.I.bdry), 0, w2.I)
    u = ps.terminal_map(strat.map.dom, w2.one)
    v = ps.terminal_map(strat.map.cod, w2.one)
    assert lf.solve_lift(strat, g, u, v).equals(v.truncate(w2.d - 1))


def test_box_fill_needs_matching_budget(affine3, w2):
    g = lf.search_fib(ps.identity(ps.terminal(affine3, 3)))
    strat = lf.cof_to_tcof_box(lf.cof(ps.empty_map(w2.one)), 0, w2.I)
    with pytest.raises(BudgetError):
        strat.lift(g, ps.terminal_map(strat.map.dom, g.map.dom.truncate(2)),
                   ps.terminal_map(strat.map.cod, g.map.dom.truncate(2)))


def test_retract_is_pullback(w2):
    two, one = w2.two, w2.one
    # 1 -> 1 is a retract of the mono (point 0): 1 -> 2
    pt = const(one, two, 0)
    r = ax.RetractDiagram(f=w2.id1, g=ps.identity(two), h=pt, k=w2.bang2, l=pt, m=w2.bang2)
    wit = ax.retract_is_pullback(r)
    assert wit.ok and wit.mediating_checked > 0
    with pytest.raises(LiftError):
        ax.retract_is_pullback(ax.RetractDiagram(f=w2.id1, g=w2.bang2, h=pt, k=w2.bang2, l=w2.id1, m=w2.id1))


@pytest.mark.parametrize("eps", [0, 1])
def test_open_box_decomposition(w2, eps):
    B2, b2 = ps.boundary(w2.site, 2, 2).to_object()
    for m in (ps.empty_map(w2.one), w2.I.bdry, b2):
        dec = ax.open_box_decomposition(lf.cof(m), eps, w2.I if m.trunc == 2 else None)
        assert dec.pushout_iso and dec.factorization, m.label
        assert all(dec.checks.values())


def test_check_axioms(w2):
    assert ax.check_axioms([], []).ok and ax.check_axioms([], []).entries == []
    fibs = [lf.search_fib(w2.bang2), lf.search_fib(w2.P1)]
    rep = ax.check_axioms([lf.cof(w2.I.bdry), lf.cof(ps.empty_map(w2.one))], fibs, w2.I)
    names = [e["name"] for e in rep.entries]
    assert any(n.startswith("axiom1") for n in names)
    assert any(n.startswith("axiom2") for n in names)
    assert any(n.startswith("axiom3") for n in names)
    assert rep.ok, [e for e in rep.entries if not e["result"]]


def test_uniformity_after_exercise(w2):
    g = lf.search_fib(w2.P1)
    solved, bad = ax.exercise_fib(g)
    assert solved > 0 and bad == 0
    rep = lf.fib_uniformity(g)
    assert rep.squares > 0 and rep.ok
    t = lf.search_tfib(w2.id1)
    ax.exercise_tfib(t)
    assert lf.tfib_uniformity(t).ok


def test_interval_search_is_not_uniform_in_connections(conn_world):
    # the first-found choice fills every box over I -> 1 but not naturally
    g = lf.search_fib(ps.terminal_map(conn_world.I.carrier, conn_world.one))
    solved, bad = ax.exercise_fib(g)
    assert bad == 0
    rep = lf.fib_uniformity(g)
    assert rep.squares > 1000 and not rep.ok
