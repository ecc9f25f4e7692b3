"""Structures on pullback homs, the retract lemmas, and the axiom checker."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import leibniz as lz
from . import lifting as lf
from . import presheaf as ps
from .lifting import CofStructure, FibStructure, LiftError, TFibStructure
from .presheaf import CubicalSet, PresheafMap
from .site import ONE, ZERO, Site, is_constant, widen_factorizations


def _box_value(site: Site, X: CubicalSet, fact, u: int, sieve, fam) -> int | None:
    """Value at ``u`` of a family given on the widened arrows of ``sieve``."""
    for w0, rho in fact.get(u, ()):
        if w0 in sieve:
            return X.restrict(rho, fam[w0])
    return None


def endpoint_tfib(fib: FibStructure, eps: int) -> tuple[TFibStructure, lz.PullbackHom]:
    """Trivial-fibration structure on ``<d_eps, f>`` from a fibration structure on ``f``.

    An extension problem on ``y(k)`` for the pullback hom is the transpose of
    a box problem on ``y(k+1)`` for ``f`` whose lid is the given end.
    """
    f = fib.map
    X, site, d = f.dom, f.site, f.trunc
    ph = lz.pullback_hom_endpoint(eps, f)
    fact = widen_factorizations(site, d)
    end = ONE if eps else ZERO

    def tcomp(k, S, fam, base):
        x, gamma = ph.to_base(k, base), ph.to_path(k, base)
        box = {}
        for u in site.into[k + 1][: site.n_into(k + 1, d)]:
            cs = site.coords[u]
            if cs[-1] == end:
                box[u] = X.restrict(site.lookup(site.src[u], cs[:-1]), x)
            else:
                v = _box_value(site, X, fact, u, S, fam)
                if v is not None:
                    box[u] = v
        return fib.comp(k, eps, frozenset(box), box, gamma)

    return TFibStructure(ph.gap, tcomp, label=f"<d{eps},{fib.label}>"), ph


def boundary_fib(fib: FibStructure) -> tuple[FibStructure, lz.PullbackHom]:
    """Fibration structure on ``<[d0,d1], f>`` from one on ``f``.

    A box problem in direction ``n+1`` for paths is a box problem for ``f``
    on ``y(n+2)``; swapping the last two coordinates puts the box direction
    last, which is the symmetry of the two interval factors.
    """
    f = fib.map
    X, Y, site, d = f.dom, f.cod, f.site, f.trunc
    ph = lz.pullback_hom_boundary(f)
    XX = ph.to_base.cod
    fact = widen_factorizations(site, d)

    def comp(n, eps, box, fam, base):
        x0, x1 = XX.keys[n + 1][ph.to_base(n + 1, base)]
        gamma = ph.to_path(n + 1, base)
        sigma = site.swap_last(n + 2)
        vals = {}
        for u in site.into[n + 2][: site.n_into(n + 2, d)]:
            cs = site.coords[u]
            if is_constant(cs[-1]):
                vals[u] = X.restrict(site.lookup(site.src[u], cs[:-1]), x1 if cs[-1] == ONE else x0)
            else:
                v = _box_value(site, X, fact, u, box, fam)
                if v is not None:
                    vals[u] = v
        swapped = {}
        for w in site.into[n + 2][: site.n_into(n + 2, d)]:
            u = site.compose(sigma, w)
            if u in vals:
                swapped[w] = vals[u]
        q = fib.comp(n + 1, eps, frozenset(swapped), swapped, Y.restrict(sigma, gamma))
        return X.restrict(sigma, q)

    return FibStructure(ph.gap, comp, label=f"<bd,{fib.label}>"), ph


# ------------------------------------------------------------------ sieves

def enumerate_sieves(site: Site, k: int, trunc: int) -> list[frozenset]:
    """All sieves on ``y(k)``, by closing sets of generators, in discovery order."""
    arrows = site.into[k][: site.n_into(k, trunc)]
    down = {g: frozenset(site.compose(g, h) for h in site.into[site.src[g]][: site.n_into(site.src[g], trunc)])
            for g in arrows}
    seen = {frozenset()}
    order = [frozenset()]
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for S in frontier:
            for g in arrows:
                if g in S:
                    continue
                T = S | down[g]
                if T not in seen:
                    seen.add(T)
                    order.append(T)
                    nxt.append(T)
        frontier = nxt
    return order


def restricted_problems(t_map: PresheafMap, sieves_by_level: dict[int, list[frozenset]], limit: int | None = None):
    """Extension problems with a known solution: restrict each cell to each sieve."""
    X, site = t_map.dom, t_map.site
    count = 0
    for k, sieves in sieves_by_level.items():
        for x in range(X.size(k)):
            for S in sieves:
                if limit is not None and count >= limit:
                    return
                fam = {g: X.restrict(g, x) for g in S}
                count += 1
                yield k, S, fam, t_map(k, x)


def exercise_tfib(t: TFibStructure, max_level: int | None = None, limit: int | None = 5000) -> tuple[int, int]:
    """Solve restricted problems and verify each solution extends and lies over the base."""
    site, X = t.map.site, t.map.dom
    top = t.trunc if max_level is None else min(max_level, t.trunc)
    sieves = {k: enumerate_sieves(site, k, t.trunc) for k in range(top + 1)}
    solved = bad = 0
    for k, S, fam, y in restricted_problems(t.map, sieves, limit):
        x = t.tcomp(k, S, fam, y)
        solved += 1
        if t.map(k, x) != y or any(X.restrict(g, x) != v for g, v in fam.items()):
            bad += 1
    return solved, bad


def box_sieves(site: Site, n: int, eps: int, trunc: int) -> list[frozenset]:
    """Sieves on ``y(n+1)`` containing the whole ``eps`` face in the last direction."""
    end = ONE if eps else ZERO
    lid = frozenset(u for u in site.into[n + 1][: site.n_into(n + 1, trunc)] if site.coords[u][-1] == end)
    return [S for S in enumerate_sieves(site, n + 1, trunc) if lid <= S]


def exercise_fib(g: FibStructure, max_level: int | None = None, limit: int | None = 5000) -> tuple[int, int]:
    site, X = g.map.site, g.map.dom
    top = g.trunc - 1 if max_level is None else min(max_level, g.trunc - 1)
    solved = bad = 0
    for n in range(top + 1):
        for eps in (0, 1):
            for S in box_sieves(site, n, eps, g.trunc):
                for x in range(X.size(n + 1)):
                    if limit is not None and solved >= limit:
                        return solved, bad
                    fam = {w: X.restrict(w, x) for w in S}
                    y = g.map(n + 1, x)
                    z = g.comp(n, eps, S, fam, y)
                    solved += 1
                    if g.map(n + 1, z) != y or any(X.restrict(w, z) != v for w, v in fam.items()):
                        bad += 1
    return solved, bad


# ------------------------------------------------------------ retract lemmas

@dataclass
class RetractDiagram:
    """``f : A -> B`` a retract of the mono ``g : C -> D``.

    ``h : A -> C``, ``k : C -> A`` with ``k h = 1``; ``l : B -> D``,
    ``m : D -> B`` with ``m l = 1``; ``g h = l f`` and ``f k = m g``.
    """

    f: PresheafMap
    g: PresheafMap
    h: PresheafMap
    k: PresheafMap
    l: PresheafMap
    m: PresheafMap


@dataclass
class PullbackWitness:
    ok: bool
    cones: int
    failures: int
    mediating_checked: int


def retract_is_pullback(r: RetractDiagram) -> PullbackWitness:
    """The square ``(h, f, g, l)`` is a pullback, with mediating cell ``k(c)`` for a cone ``(c, b)``."""
    if not r.g.is_mono():
        raise LiftError("retract lemma needs a mono")
    eqs = [
        ps.commutes((r.h, r.k), (ps.identity(r.f.dom),)),
        ps.commutes((r.l, r.m), (ps.identity(r.f.cod),)),
        ps.commutes((r.h, r.g), (r.f, r.l)),
        ps.commutes((r.k, r.f), (r.g, r.m)),
    ]
    if not all(eqs):
        raise LiftError("retract equations fail")
    sq = ps.check_pullback_square(r.h, r.f, r.g, r.l)
    checked = fails = 0
    for n in range(r.f.trunc + 1):
        ic, ib = ps.kernels.join_codes(r.g.comp[n], r.l.comp[n])
        for c, b in zip(ic.tolist(), ib.tolist()):
            a = r.k(n, c)
            checked += 1
            fails += r.h(n, a) != c or r.f(n, a) != b
    return PullbackWitness(sq.ok and fails == 0, sq.cones, sq.failures + fails, checked)


# ------------------------------------------------------------- open boxes

@dataclass
class OpenBoxDecomposition:
    box: CubicalSet              # B (x) {eps}  u  A (x) I
    frame: CubicalSet            # B (x) {0,1}  u  A (x) I
    box_to_frame: PresheafMap
    pushout_iso: bool
    factorization: bool
    checks: dict = field(default_factory=dict)


def open_box_decomposition(c: CofStructure, eps: int, I: lz.Interval | None = None) -> OpenBoxDecomposition:
    """Split ``c (x)^ d_eps`` as the lid gluing followed by ``c (x)^ [d0,d1]``.

    The lid square glues ``B`` along ``A -> box`` (``a |-> (a, 1-eps)``); its
    pushout is compared with the frame, and the composite with the frame
    inclusion is compared with the box inclusion.
    """
    B = c.map.cod
    site = B.site
    I = I or lz.interval(site, B.trunc)
    tw = lz.tensor(B, I.carrier)
    box_sub, box, box_incl = lf.box_corner(c, eps, tw)
    img = c.image()
    frame_member = []
    for n in range(tw.product.trunc + 1):
        ends = np.asarray([is_constant(site.coords[t][0]) for t in I.carrier.keys[n]], dtype=bool)
        frame_member.append(ends[tw.pr1.comp[n]] | img[n][tw.pr0.comp[n]])
    frame, frame_incl = ps.Subpresheaf(tw.product, frame_member).to_object(label="frame")
    box_to_frame = ps.map_from_function(box, frame,
                                        lambda n, x: frame.index(n, tw.product.keys[n][box_incl(n, x)]))
    A = c.map.dom
    far = [I.carrier.index(n, site.lookup(n, (ONE if eps == 0 else ZERO,))) for n in range(B.trunc + 1)]

    def cell(n, b, t):
        return tw.pair(n, b, t)

    iota = ps.map_from_function(A, box, lambda n, a: box.index(n, tw.product.keys[n][cell(n, c.map(n, a), far[n])]))
    lid = ps.map_from_function(B, frame, lambda n, b: frame.index(n, tw.product.keys[n][cell(n, b, far[n])]))
    Q, inl, inr = ps.pushout(iota, c.map, label="glued")
    comparison = ps.copair(Q, inl, inr, box_to_frame, lid)
    factor = ps.commutes((box_to_frame, frame_incl), (box_incl,))
    checks = {"lid square commutes": ps.commutes((iota, box_to_frame), (c.map, lid)),
              "glued -> frame is iso": comparison.is_iso()}
    return OpenBoxDecomposition(box, frame, box_to_frame, comparison.is_iso(), factor, checks)


# ----------------------------------------------------------------- axioms

@dataclass
class AxiomReport:
    entries: list = field(default_factory=list)

    def add(self, name: str, quantified_over: str, ok: bool, count: int = 0):
        self.entries.append({"name": name, "quantified_over": quantified_over, "result": bool(ok), "count": count})

    @property
    def ok(self) -> bool:
        return all(e["result"] for e in self.entries)


def check_axioms(cofs: list[CofStructure], fibs: list[FibStructure], I: lz.Interval | None = None,
                 limit: int | None = 2000) -> AxiomReport:
    """Axiom 1 on every cofibration, Axioms 2 and 3 on every fibration."""
    rep = AxiomReport()
    for c in cofs:
        I_c = I if I is not None and I.carrier.trunc == c.map.trunc else lz.interval(c.map.site, c.map.trunc)
        lp = lz.pushout_product(c.map, I_c.bdry)
        rep.add(f"axiom1[{c.map.label}]", "pushout product with the interval boundary is mono",
                lp.map.is_mono() and lp.map.naturality_violations() == 0, 1)
    for g in fibs:
        if g.trunc < 1:
            continue
        for eps in (0, 1):
            t, _ = endpoint_tfib(g, eps)
            solved, bad = exercise_tfib(t, limit=limit)
            uni = lf.tfib_uniformity(t, limit=limit)
            rep.add(f"axiom2[{g.label},{eps}]", "restricted extension problems on all sieves",
                    bad == 0, solved)
            rep.add(f"axiom2-uniform[{g.label},{eps}]", uni.quantified_over, uni.ok, uni.squares)
        if g.trunc >= 2:
            b, _ = boundary_fib(g)
            solved, bad = exercise_fib(b, limit=limit)
            uni = lf.fib_uniformity(b, limit=limit)
            rep.add(f"axiom3[{g.label}]", "restricted box problems on all box sieves", bad == 0, solved)
            rep.add(f"axiom3-uniform[{g.label}]", uni.quantified_over, uni.ok, uni.squares)
    return rep
