import pytest

from cubeid import lifting as lf
from cubeid import pathobj as po
from cubeid import presheaf as ps
from cubeid import stepone as so
from cubeid.lifting import LiftError
from cubeid.presheaf import PresheafError
from cubeid.site import ONE, ZERO

AFF_SCENARIOS = ["1->1", "2->1", "2xI->I"]


def motive_identity(idt):
    return lf.fib_identity(idt.carrier), idt.refl


def motive_discrete(idt, k=2):
    """``Id x k -> Id`` with ``d`` the refl inclusion at the first point."""
    site, E = idt.carrier.site, idt.carrier
    K = ps.discrete(site, E.trunc, k)
    M, pr0, pr1 = ps.product(E, K)
    q = lf.search_fib(pr0)
    d = ps.map_from_function(idt.refl.dom, M, lambda n, x: M.index(n, (idt.refl(n, x), 0)))
    return q, d


@pytest.mark.parametrize("name", AFF_SCENARIOS)
@pytest.mark.parametrize("motive", [motive_identity, motive_discrete])
def test_strict_beta_affine(aff_world, name, motive):
    idt, _ = aff_world.id_type(name)
    q, d = motive(idt)
    J = po.j_eliminator(idt, q, d)
    assert all(po.strict_beta(idt, q, d, J).values())
    assert J.trunc == aff_world.d - 2


@pytest.mark.parametrize("route", ["sdr", "connections"])
@pytest.mark.parametrize("name", AFF_SCENARIOS)
def test_strict_beta_connections(conn_world, name, route):
    idt, _ = conn_world.id_type(name, route)
    q, d = motive_discrete(idt)
    J = po.j_eliminator(idt, q, d)
    assert all(po.strict_beta(idt, q, d, J).values())


def test_interval_needs_the_connections_route(aff_world, conn_world):
    idt, _ = conn_world.id_type("I->1", "connections")
    q, d = motive_identity(idt)
    assert all(po.strict_beta(idt, q, d, po.j_eliminator(idt, q, d)).values())
    with pytest.raises(LiftError):
        aff_world.id_type("I->1", "sdr")


def test_j_rejects_wrong_motive(aff_world):
    idt, _ = aff_world.id_type("1->1")
    q = lf.fib_identity(idt.carrier)
    with pytest.raises(LiftError):
        po.j_eliminator(idt, q, ps.identity(idt.carrier))


@pytest.mark.parametrize("name", AFF_SCENARIOS)
def test_identity_type_shape(aff_world, name):
    idt, _ = aff_world.id_type(name)
    assert idt.refl.is_mono()
    mp = idt.path_space
    diag = ps.map_from_function(idt.refl.dom, mp.diagonal_obj, lambda n, x: mp.diagonal_obj.index(n, (x, x)))
    assert ps.commutes((idt.refl, idt.p), (diag,))
    assert idt.sdr.ok


def test_unit_identity_type_has_two_vertices(aff_world):
    idt, _ = aff_world.id_type("1->1")
    assert idt.carrier.size(0) == 2


def test_make_sdr_and_refl_sdr(aff_world):
    idt, fib = aff_world.id_type("2->1")
    mp = idt.path_space
    s = idt.factorization
    sdr = po.refl_sdr(mp, s)
    assert sdr.ok and set(sdr.equations()) == {"h.(B@d0) = s.f", "h.(B@d1) = 1", "f.s = 1", "h.(s@I) = s.pi0"}
    # a constant map does not split C1
    X, E = s.c1.dom, s.E
    const = ps.map_from_function(E, X, lambda n, e: X.restrict(X.site.hom[(n, 0)][0], 0))
    with pytest.raises(LiftError):
        po.make_sdr(so.cof_of_c1(s), lf.search_tfib(const))


def test_conn_and_lift_sdr(conn_world):
    idt, _ = conn_world.id_type("2->1", "connections")
    mp = idt.path_space
    c = po.conn_sdr(mp)
    assert c.ok
    lifted = po.lift_sdr(c, so.cof_of_c1(idt.factorization), so.tfib_of_f1t(idt.factorization))
    assert lifted.ok and all(lifted.squares.values())


def test_conn_sdr_needs_connections(aff_world):
    idt, _ = aff_world.id_type("1->1")
    with pytest.raises(PresheafError):
        po.conn_sdr(idt.path_space)


def test_unknown_route(aff_world):
    with pytest.raises(PresheafError):
        po.id_type(aff_world.id1, lf.search_fib(aff_world.id1), route="nope")


def test_transport_along_the_interval(aff_world):
    w = aff_world
    g = lf.search_fib(w.P1)
    site = w.site
    v = [w.I.carrier.index(0, site.lookup(0, (e,))) for e in (ZERO, ONE)]
    for point in (0, 1):
        a = w.P.index(0, (point, v[0]))
        assert po.transport(g, ps.identity(w.I.carrier), a) == w.P.index(0, (point, v[1]))
    with pytest.raises(LiftError):
        po.transport(g, ps.identity(w.I.carrier), w.P.index(0, (0, v[1])))


def test_frobenius(aff_world):
    w = aff_world
    I = w.I
    f = lf.search_fib(w.P1.truncate(2))
    d0 = I.d0.truncate(2)
    rep = po.frobenius_check(d0, f, [lf.search_fib(w.bang2.truncate(2))])
    assert rep.pullback_ok and rep.problems > 0 and rep.ok


def stability_squares(w):
    """Pullback squares ``(top, f, f2, bottom)`` with fibrations on both sides."""
    F = lf.search_fib(w.P1)
    out = {
        "identity": (ps.identity(w.two), w.bang2, w.bang2, w.id1, lf.search_fib(w.bang2), lf.search_fib(w.bang2)),
        "product": (ps.identity(w.P), w.P1, w.P1, ps.identity(w.I.carrier), F, F),
    }
    for eps in (0, 1):
        Q, q0, q1 = ps.pullback(w.I.endpoint(eps), w.P1)
        out[f"end{eps}"] = (q1, q0, w.P1, w.I.endpoint(eps), lf.fib_pullback(F, q1, q0, w.I.endpoint(eps)), F)
    return out


@pytest.mark.parametrize("case", ["identity", "product", "end0", "end1"])
def test_stability(aff_world, case):
    top, f, f2, bottom, g, g2 = stability_squares(aff_world)[case]
    rep = po.stability_check(top, f, f2, bottom, g, g2)
    assert rep.ok, rep.stages
    assert set(rep.stages) == set(po.STAGES)


def test_stability_names_the_first_failing_stage(aff_world):
    w = aff_world
    rep = po.stability_check(w.bang2, w.bang2, w.id1, w.id1, lf.search_fib(w.bang2), lf.fib_identity(w.one))
    assert not rep.ok
    assert not rep.stages["input"]
    assert rep.first_failure == "eq29"
