"""Mapping path spaces, deformation retracts, identity types and J.

Budgets: for ``f`` at budget ``d`` the path objects and identity types live
at ``d - 1`` and eliminators, which fill boxes, at ``d - 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import axioms as ax
from . import leibniz as lz
from . import lifting as lf
from . import presheaf as ps
from . import stepone as so
from .lifting import CofStructure, FibStructure, LiftError, TCofStrategy, TFibStructure
from .presheaf import BudgetError, CubicalSet, PresheafError, PresheafMap
from .site import ONE, ZERO, meet, var

ROUTES = ("sdr", "connections")


# ------------------------------------------------------- mapping path space

@dataclass
class MappingPathSpace:
    of: PresheafMap
    carrier: CubicalSet
    r: PresheafMap
    e0: PresheafMap
    e1: PresheafMap
    pf: PresheafMap
    diagonal_obj: CubicalSet        # X x_Y X
    to_paths: PresheafMap           # carrier -> P X
    to_base: PresheafMap            # carrier -> Y
    pf_fib: FibStructure | None
    e_tfib: tuple | None            # (structure on e0, structure on e1)

    def e(self, eps: int) -> PresheafMap:
        return self.e1 if eps else self.e0


def _diagonal(X: CubicalSet, fd: PresheafMap):
    XYX, p0, p1 = ps.pullback(fd, fd, label=f"{X.label}x_{fd.cod.label}{X.label}")
    return XYX, p0, p1


def mapping_path_space(f: PresheafMap, fib: FibStructure | None = None) -> MappingPathSpace:
    """Paths in ``X`` lying over constant paths in ``Y``, as a pullback of ``P f`` along ``r_Y``."""
    X, Y = f.dom, f.cod
    if f.trunc < 1:
        raise BudgetError("the mapping path space needs budget >= 1")
    PX, PY = lz.pshift(X), lz.pshift(Y)
    d = PX.trunc
    rY = lz.const_path(Y, PY)
    P, to_paths, to_base = ps.pullback(lz.pshift_map(f, PX, PY), rY, label=f"P_{Y.label}({X.label})")
    rX = lz.const_path(X, PX)
    fd = f.truncate(d)
    r = ps.pairing(P, rX, fd, label="r")
    e0 = to_paths.then(lz.eval_end(X, 0, PX))
    e1 = to_paths.then(lz.eval_end(X, 1, PX))
    e0.label, e1.label = "e0", "e1"
    XYX, _, _ = _diagonal(X, fd)
    pf = ps.pairing(XYX, e0, e1, label="p_f")
    pf_fib = e_tfib = None
    if fib is not None:
        pf_fib = _pf_structure(fib, P, to_paths, pf, XYX, rY)
        e_tfib = tuple(_e_structure(fib, eps, P, to_paths, e, rY) for eps, e in ((0, e0), (1, e1)))
    return MappingPathSpace(f, P, r, e0, e1, pf, XYX, to_paths, to_base, pf_fib, e_tfib)


def _pf_structure(fib, P, to_paths, pf, XYX, rY) -> FibStructure:
    """``p_f`` is the pullback of ``<[d0,d1], f>`` along ``(x0, x1) |-> ((x0, x1), r_Y f x0)``."""
    g, ph = ax.boundary_fib(fib)
    f = fib.map
    corner = ph.gap.cod
    XX = ph.to_base.cod

    def j(n, c):
        x0, x1 = XYX.keys[n][c]
        return corner.index(n, (XX.index(n, (x0, x1)), int(rY.comp[n][f(n, x0)])))

    bottom = ps.map_from_function(XYX, corner, j, label="j")
    return lf.fib_pullback(g, to_paths, pf, bottom)


def _e_structure(fib, eps, P, to_paths, e, rY) -> TFibStructure:
    """``e_eps`` is the pullback of ``<d_eps, f>`` along ``x |-> (x, r_Y f x)``."""
    t, ph = ax.endpoint_tfib(fib, eps)
    f = fib.map
    corner = ph.gap.cod
    X = e.cod
    bottom = ps.map_from_function(X, corner, lambda n, x: corner.index(n, (x, int(rY.comp[n][f(n, x)]))),
                                  label=f"k{eps}")
    return lf.tfib_pullback(t, to_paths, e, bottom)


# ------------------------------------------------ strong deformation retracts

def end_section(tw: lz.TensorWitness, eps: int) -> PresheafMap:
    """``B -> B (x) I`` at the constant end ``eps``."""
    B, I = tw.left, tw.right
    site = B.site
    end = ONE if eps else ZERO
    comp = []
    for n in range(B.trunc + 1):
        t = I.index(n, site.lookup(n, (end,)))
        comp.append(np.asarray([tw.pair(n, b, t) for b in range(B.size(n))], dtype=np.int64))
    return PresheafMap(B, tw.product, comp, label=f"B@d{eps}", check=False)


@dataclass
class SdrWitness:
    """``incl : A -> B`` with retraction and a homotopy ``B (x) I -> B``.

    The homotopy runs from ``incl . retraction`` at 0 to the identity at 1
    and is constant on ``A``.
    """

    incl: PresheafMap
    retraction: PresheafMap
    homotopy: PresheafMap
    tensor: lz.TensorWitness        # B (x) I
    label: str = ""
    _equations: dict = field(default_factory=dict, repr=False)

    def equations(self) -> dict[str, bool]:
        if self._equations:
            return self._equations
        s, f, h, tw = self.incl, self.retraction, self.homotopy, self.tensor
        A, B = s.dom, s.cod
        I = tw.right
        twA = lz.tensor(A, I)
        sI = lz.tensor_map(s, ps.identity(I), twA, tw)
        self._equations = {
            "h.(B@d0) = s.f": ps.commutes((end_section(tw, 0), h), (f, s)),
            "h.(B@d1) = 1": ps.commutes((end_section(tw, 1), h), (ps.identity(B),)),
            "f.s = 1": ps.commutes((s, f), (ps.identity(A),)),
            "h.(s@I) = s.pi0": ps.commutes((sI, h), (twA.pr0, s)),
        }
        return self._equations

    @property
    def ok(self) -> bool:
        return all(self.equations().values())

    def verify(self) -> "SdrWitness":
        if not self.ok:
            bad = [k for k, v in self.equations().items() if not v]
            raise LiftError(f"deformation retract equations fail: {bad}")
        return self


def _frame(c: CofStructure, tw: lz.TensorWitness):
    """``B (x) {0,1}  u  A (x) I`` inside ``B (x) I``, as a cofibration."""
    site = tw.product.site
    img = c.image()
    member = []
    for n in range(tw.product.trunc + 1):
        ends = np.asarray([site.coords[t][0] in (ZERO, ONE) for t in tw.right.keys[n]], dtype=bool)
        member.append(ends[tw.pr1.comp[n]] | img[n][tw.pr0.comp[n]])
    frame, incl = ps.Subpresheaf(tw.product, member, check=False).to_object(label="frame")
    return frame, incl


def _frame_top(frame, incl, tw, inner, top_end):
    """Frame map: ``inner`` on the 0 end, ``top_end`` on the 1 end, the cell itself on ``A (x) I``."""
    site = tw.product.site

    def val(n, c):
        b, t = tw.product.keys[n][incl(n, c)]
        term = site.coords[tw.right.keys[n][t]][0]
        if term == ZERO:
            return inner(n, b)
        if term == ONE:
            return top_end(n, b)
        return b

    return val


def make_sdr(r: CofStructure, i: TFibStructure, I: lz.Interval | None = None) -> SdrWitness:
    """Homotopy as the chosen extension of ``r (x)^ [d0,d1]`` against ``i``."""
    B = r.map.cod
    if not ps.commutes((r.map, i.map), (ps.identity(r.map.dom),)):
        raise LiftError("retraction does not split the inclusion")
    I = I or lz.interval(B.site, B.trunc)
    tw = lz.tensor(B, I.carrier)
    frame, incl = _frame(r, tw)
    ri = i.map.then(r.map)
    top = ps.map_from_function(frame, B, _frame_top(frame, incl, tw, ri, lambda n, b: b), label="frame-top",
                               check=False)
    bottom = tw.pr0.then(i.map)
    h = i.fill(CofStructure(incl), top, bottom)
    h.label = "h"
    return SdrWitness(r.map, i.map, h, tw, label=f"sdr({r.map.label})").verify()


def sdr_to_tcof(t: CofStructure, sdr: SdrWitness, I: lz.Interval | None = None) -> TCofStrategy:
    """Lift against ``t`` through the retract of ``t`` onto ``t (x)^ d0``.

    The square is moved along ``b |-> (b, 1)`` and the homotopy, filled as
    an open box, then restricted back to the 1 end.
    """
    B = t.map.cod
    I = I or lz.interval(B.site, B.trunc)
    box = lf.cof_to_tcof_box(t, 0, I)
    tw = box.tensor
    if tw.product.keys != sdr.tensor.product.keys:
        raise PresheafError("homotopy and box live on different tensors")
    retract_top = box.map.then(tw.pr0).then(sdr.retraction)    # corner -> A, [i, pi0]
    h = PresheafMap(tw.product, B, sdr.homotopy.comp, label="h", check=False)
    at_one = end_section(tw, 1)

    def lift(g, u, v):
        F = box.lift(g, retract_top.then(u), h.then(v))
        return at_one.truncate(F.trunc).then(F)

    return TCofStrategy(t.map, lift, label=f"sdr-tcof({t.map.label})", loss=1)


def conn_sdr(mp: MappingPathSpace, I: lz.Interval | None = None) -> SdrWitness:
    """``r : X -> P_Y(X)`` retracts onto ``e0`` by shrinking paths with ``min``."""
    site = mp.carrier.site
    if not site.mode.connections:
        raise PresheafError("conn_sdr needs the connections mode")
    B, X = mp.carrier, mp.of.dom
    I = I or lz.interval(site, B.trunc)
    tw = lz.tensor(B, I.carrier)
    comp = []
    for n in range(B.trunc + 1):
        row = []
        for b, t in tw.product.keys[n]:
            gamma, y = B.keys[n][b]
            tau = site.coords[I.carrier.keys[n][t]][0]
            rho = site.lookup(n + 1, tuple(var(j) for j in range(1, n + 1)) + (meet(var(n + 1), tau),))
            row.append(B.index(n, (X.restrict(rho, gamma), y)))
        comp.append(np.asarray(row, dtype=np.int64))
    h = PresheafMap(tw.product, B, comp, label="h_min")
    return SdrWitness(mp.r, mp.e0, h, tw, label="conn-sdr").verify()


def lift_sdr(sdr: SdrWitness, r2: CofStructure, f: TFibStructure, I: lz.Interval | None = None) -> SdrWitness:
    """Move a retract along a trivial fibration ``f`` with ``f . r2 = sdr.incl``."""
    if not ps.commutes((r2.map, f.map), (sdr.incl,)):
        raise LiftError("lift_sdr: f . r' differs from r")
    B2 = r2.map.cod
    I = I or lz.interval(B2.site, B2.trunc)
    tw2 = lz.tensor(B2, I.carrier)
    i2 = f.map.then(sdr.retraction)
    frame, incl = _frame(r2, tw2)
    ri = i2.then(r2.map)
    top = ps.map_from_function(frame, B2, _frame_top(frame, incl, tw2, ri, lambda n, b: b), check=False)
    fI = lz.tensor_map(f.map, ps.identity(I.carrier), tw2, sdr.tensor)
    bottom = fI.then(sdr.homotopy)
    h2 = f.fill(CofStructure(incl), top, bottom)
    h2.label = "h'"
    out = SdrWitness(r2.map, i2, h2, tw2, label=f"lift({sdr.label})").verify()
    out.squares = {
        "f.h' = h.(f@I)": ps.commutes((h2, f.map), (fI, sdr.homotopy)),
        "i.f = i'": ps.commutes((f.map, sdr.retraction), (i2,)),
    }
    return out


# -------------------------------------------------------------- identity type

@dataclass
class IdType:
    of: PresheafMap
    carrier: CubicalSet
    refl: PresheafMap
    p: PresheafMap
    refl_tcof: TCofStrategy
    p_fib: FibStructure | None
    path_space: MappingPathSpace
    factorization: so.StepOneFactorization
    sdr: SdrWitness
    route: str

    @property
    def trunc(self) -> int:
        return self.carrier.trunc


def refl_sdr(mp: MappingPathSpace, s: so.StepOneFactorization) -> SdrWitness:
    """Retract ``C1 r`` onto ``e0 . F1t r``."""
    if mp.e_tfib is None:
        raise LiftError("refl_sdr needs a fibration structure on f")
    i = lf.tfib_compose(so.tfib_of_f1t(s), mp.e_tfib[0])
    return make_sdr(so.cof_of_c1(s), i)


def id_type(f: PresheafMap, fib: FibStructure | None, route: str = "sdr",
            max_cells: int = so.DEFAULT_MAX_CELLS) -> IdType:
    if route not in ROUTES:
        raise PresheafError(f"unknown route {route!r}")
    if f.trunc < 2:
        raise BudgetError("identity types need budget >= 2")
    mp = mapping_path_space(f, fib)
    s = so.step_one(mp.r, max_cells=max_cells, label=f"Id_{f.cod.label}({f.dom.label})")
    c1 = so.cof_of_c1(s)
    if route == "sdr":
        sdr = refl_sdr(mp, s)
    else:
        sdr = lift_sdr(conn_sdr(mp), c1, so.tfib_of_f1t(s))
    refl = s.c1
    refl.label = "refl"
    p = s.f1t.then(mp.pf)
    p.label = "p"
    p_fib = None
    if mp.pf_fib is not None:
        p_fib = lf.fib_compose(lf.tfib_to_fib(so.tfib_of_f1t(s)), mp.pf_fib)
    return IdType(f, s.E, refl, p, sdr_to_tcof(c1, sdr), p_fib, mp, s, sdr, route)


def j_eliminator(idt: IdType, q: FibStructure, d: PresheafMap) -> PresheafMap:
    """The chosen diagonal filler of ``refl`` against ``q`` for the square ``(d, 1)``."""
    if not ps.commutes((d, q.map), (idt.refl,)):
        raise LiftError("q . d differs from refl")
    J = lf.solve_lift(idt.refl_tcof, q, d, ps.identity(idt.carrier))
    J.label = "J"
    return J


def strict_beta(idt: IdType, q: FibStructure, d: PresheafMap, J: PresheafMap) -> dict[str, bool]:
    e = J.trunc
    return {
        "q.J = 1": ps.commutes((J, q.map.truncate(e)), (ps.identity(idt.carrier.truncate(e)),)),
        "J.refl = d": ps.commutes((idt.refl.truncate(e), J), (d.truncate(e),)),
    }


# ------------------------------------------------------------------ transport

def transport(fib: FibStructure, path: PresheafMap, a: int) -> int:
    """Carry ``a`` over ``path(0)`` to a cell over ``path(1)``."""
    A, G = fib.map.dom, fib.map.cod
    site = A.site
    if fib.trunc < 1:
        raise BudgetError("transport needs budget >= 1")
    I = path.dom
    at = [path(0, I.index(0, site.lookup(0, (e,)))) for e in (ZERO, ONE)]
    if fib.map(0, a) != at[0]:
        raise LiftError("transport: cell is not over the start of the path")
    box, fam = {}, {}
    for u in site.into[1][: site.n_into(1, fib.trunc)]:
        if site.coords[u] == (ZERO,):
            m = site.src[u]
            fam[u] = A.restrict(site.lookup(m, ()), a)
            box[u] = True
    base = path(1, I.index(1, site.identity(1)))
    c = fib.comp(0, 0, frozenset(box), fam, base)
    return A.restrict(site.face(1, 1, 1), c)


# ------------------------------------------------------------------ stability

STAGES = ("input", "eq29", "psquare", "eq32", "commutation")


@dataclass
class StabilityReport:
    stages: dict
    cones: dict
    first_failure: str | None

    @property
    def ok(self) -> bool:
        return self.first_failure is None


def _pair_map(P: CubicalSet, Q: CubicalSet, f0: PresheafMap, f1: PresheafMap) -> PresheafMap:
    """``(a, b) |-> (f0 a, f1 b)`` between pair-keyed objects."""
    comp = [np.asarray([Q.index(n, (f0(n, a), f1(n, b))) for a, b in P.keys[n]], dtype=np.int64)
            for n in range(P.trunc + 1)]
    return PresheafMap(P, Q, comp, label="pair", check=False)


def stability_check(top: PresheafMap, f: PresheafMap, f2: PresheafMap, bottom: PresheafMap,
                    fib: FibStructure | None = None, fib2: FibStructure | None = None,
                    route: str = "sdr") -> StabilityReport:
    """Pullback squares induced by a square ``top, f, f2, bottom`` (f over f2).

    ``eq29`` is the square of diagonals over ``Y -> Y'``, ``psquare`` the
    square of mapping path spaces over the diagonals, ``eq32`` the square of
    identity types over the diagonals; ``commutation`` checks that the
    induced map of identity types respects ``refl`` and ``p``.
    """
    stages, cones = {}, {}

    def record(name, chk):
        stages[name] = bool(chk.ok)
        cones[name] = chk.cones

    record("input", ps.check_pullback_square(top, f, f2, bottom))
    idt = id_type(f, fib, route) if fib is not None else None
    idt2 = id_type(f2, fib2, route) if fib2 is not None else None
    mp = idt.path_space if idt else mapping_path_space(f)
    mp2 = idt2.path_space if idt2 else mapping_path_space(f2)
    d = mp.carrier.trunc
    a, b = top.truncate(d), bottom.truncate(d)
    D, D2 = mp.diagonal_obj, mp2.diagonal_obj
    aa = _pair_map(D, D2, a, a)
    qD = ps.map_from_function(D, b.dom, lambda n, c: f(n, D.keys[n][c][0]), check=False)
    qD2 = ps.map_from_function(D2, b.cod, lambda n, c: f2(n, D2.keys[n][c][0]), check=False)
    record("eq29", ps.check_pullback_square(aa, qD, qD2, b))
    Pa = _pair_map(mp.carrier, mp2.carrier, lz.pshift_map(top), b)
    record("psquare", ps.check_pullback_square(Pa, mp.pf, mp2.pf, aa))
    s = idt.factorization if idt else so.step_one(mp.r)
    s2 = idt2.factorization if idt2 else so.step_one(mp2.r)
    Ia = so.functorial(s, s2, a, Pa)
    p = s.f1t.then(mp.pf)
    p2 = s2.f1t.then(mp2.pf)
    record("eq32", ps.check_pullback_square(Ia, p, p2, aa))
    stages["commutation"] = bool(ps.commutes((s.c1, Ia), (a, s2.c1)) and ps.commutes((Ia, p2), (p, aa)))
    cones["commutation"] = sum(s.E.sizes())
    first = next((k for k in STAGES[1:] if not stages[k]), None)
    if first is None and not stages["input"]:
        first = "input"
    return StabilityReport(stages, cones, first)


# ------------------------------------------------------------------ Frobenius

@dataclass
class FrobeniusReport:
    problems: int
    solved: int
    pullback_ok: bool

    @property
    def ok(self) -> bool:
        return self.pullback_ok and self.problems == self.solved


def search_filler(c: PresheafMap, g: PresheafMap, u: PresheafMap, v: PresheafMap) -> PresheafMap | None:
    """Some diagonal filler of the square ``g . u = v . c``, found by exhaustive search."""
    B, Z = c.cod, g.dom
    back = CofStructure(c).preimage()
    allowed = []
    for n in range(B.trunc + 1):
        ok = v.comp[n][:, None] == g.comp[n][None, :]
        pre = back[n]
        fixed = pre >= 0
        if fixed.any():
            want = u.comp[n][pre[fixed]]
            ok[fixed] = np.arange(Z.size(n))[None, :] == want[:, None]
        allowed.append(ok)
    found = ps.enumerate_homs(B, Z, limit=1, strict=False, allowed=allowed)
    return found[0] if found else None


def frobenius_check(i: PresheafMap, f: FibStructure, fibs: list[FibStructure], limit: int = 20) -> FrobeniusReport:
    """The pullback of ``i`` along the fibration ``f`` lifts against every listed fibration."""
    P, ibar, top = ps.pullback(f.map, i, label="frob")
    sq = ps.check_pullback_square(top, ibar, i, f.map)
    problems = solved = 0
    for g in fibs:
        for u in ps.enumerate_homs(ibar.dom.truncate(g.trunc), g.map.dom, limit=limit, strict=False):
            ic = ibar.truncate(g.trunc)
            for v in ps.enumerate_homs(ic.cod, g.map.cod, limit=limit, strict=False,
                                       allowed=_bottom_mask(ic, u.then(g.map))):
                problems += 1
                h = search_filler(ic, g.map, u, v)
                if h is not None:
                    lf.check_triangles(ic, g.map, u, v, h)
                    solved += 1
    return FrobeniusReport(problems, solved, sq.ok)


def _bottom_mask(c: PresheafMap, w: PresheafMap) -> list[np.ndarray]:
    """Bottom maps ``v`` with ``v . c = w``."""
    back = CofStructure(c).preimage()
    out = []
    for n in range(c.trunc + 1):
        ok = np.ones((c.cod.size(n), w.cod.size(n)), dtype=bool)
        pre = back[n]
        fixed = pre >= 0
        ok[fixed] = np.arange(w.cod.size(n))[None, :] == w.comp[n][pre[fixed]][:, None]
        out.append(ok)
    return out
