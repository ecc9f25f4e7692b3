"""Monoidal product, interval, pushout products, path shift and pullback homs.

The product is the separated product in affine mode (pairs of cells with
disjoint supports) and the cartesian product otherwise.  ``pshift`` is the
right adjoint ``P`` of ``- (x) I``: level ``n`` of ``P(X)`` is level ``n+1``
of ``X``, so every application costs one level of budget.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import presheaf as ps
from .presheaf import BudgetError, CubicalSet, PresheafError, PresheafMap, Subpresheaf
from .site import ONE, ZERO, Kind, Site, join, meet, var


# ---------------------------------------------------------------- interval

@dataclass
class Interval:
    carrier: CubicalSet
    point: CubicalSet
    d0: PresheafMap
    d1: PresheafMap
    ends: CubicalSet
    bdry: PresheafMap

    def endpoint(self, eps: int) -> PresheafMap:
        return self.d1 if eps else self.d0


def interval(site: Site, trunc: int) -> Interval:
    I = ps.yoneda(site, 1, trunc)
    I.label = "I"
    one = ps.terminal(site, trunc)
    d0 = ps.induced_map(site, site.face(1, 1, 0), trunc, dom=one, cod=I)
    d1 = ps.induced_map(site, site.face(1, 1, 1), trunc, dom=one, cod=I)
    d0.label, d1.label = "d0", "d1"
    ends, inl, inr = ps.coproduct(one, one, label="1+1")
    bdry = ps.copair(ends, inl, inr, d0, d1, label="[d0,d1]")
    return Interval(I, one, d0, d1, ends, bdry)


# ------------------------------------------------------------------ tensor

@dataclass
class TensorWitness:
    """``left (x) right`` with its projections (the product is affine)."""

    product: CubicalSet
    left: CubicalSet
    right: CubicalSet
    pr0: PresheafMap
    pr1: PresheafMap

    def pair(self, n: int, a: int, b: int) -> int | None:
        return self.product.find(n, (a, b))

    def components(self, n: int, k: int) -> tuple[int, int]:
        return self.product.keys[n][k]


def tensor(X: CubicalSet, Y: CubicalSet, label: str = "") -> TensorWitness:
    if X.site is not Y.site:
        raise PresheafError("tensor needs a common site")
    if X.trunc != Y.trunc:
        raise BudgetError(f"tensor needs equal budgets, got {X.trunc} and {Y.trunc}")
    label = label or f"({X.label}@{Y.label})"
    P, p0, p1 = ps.product(X, Y, label=label)
    if X.mode.kind is Kind.AFFINE:
        member = [(X.support_masks(n)[p0.comp[n]] & Y.support_masks(n)[p1.comp[n]]) == 0
                  for n in range(P.trunc + 1)]
        T, incl = Subpresheaf(P, member, check=False).to_object(label=label)
        p0 = incl.then(p0)
        p1 = incl.then(p1)
        P = T
    p0.label, p1.label = "pi0", "pi1"
    return TensorWitness(P, X, Y, p0, p1)


def tensor_map(f: PresheafMap, g: PresheafMap, src: TensorWitness, tgt: TensorWitness) -> PresheafMap:
    """``f (x) g`` between the given tensors."""
    comp = []
    for n in range(src.product.trunc + 1):
        a, b = src.pr0.comp[n], src.pr1.comp[n]
        comp.append(np.asarray([tgt.product.index(n, (int(x), int(y)))
                                for x, y in zip(f.comp[n][a], g.comp[n][b])], dtype=np.int64))
    return PresheafMap(src.product, tgt.product, comp, label=f"{f.label}@{g.label}", check=False)


def swap(tw: TensorWitness, back: TensorWitness) -> PresheafMap:
    """Symmetry ``X (x) Y -> Y (x) X``."""
    comp = [np.asarray([back.product.index(n, (b, a)) for a, b in tw.product.keys[n]], dtype=np.int64)
            for n in range(tw.product.trunc + 1)]
    return PresheafMap(tw.product, back.product, comp, label="swap", check=False)


def cube_tensor_iso(site: Site, a: int, b: int, trunc: int, tw: TensorWitness) -> PresheafMap:
    """``y(a) (x) y(b) -> y(a+b)`` concatenating coordinates; ``tw`` must be that tensor."""
    cube = ps.yoneda(site, a + b, trunc)
    comp = []
    for n in range(trunc + 1):
        L, R = tw.left.keys[n], tw.right.keys[n]
        comp.append(np.asarray([cube.index(n, site.lookup(n, site.coords[L[i]] + site.coords[R[j]]))
                                for i, j in tw.product.keys[n]], dtype=np.int64))
    return PresheafMap(tw.product, cube, comp, label="concat")


# --------------------------------------------------------- pushout product

@dataclass
class LeibnizProduct:
    """``f (x)^ g``: the gap map out of the pushout corner into ``B (x) D``."""

    map: PresheafMap
    corner: CubicalSet
    from_left: PresheafMap   # B (x) C -> corner
    from_right: PresheafMap  # A (x) D -> corner
    target: TensorWitness

    @property
    def dom(self) -> CubicalSet:
        return self.map.dom

    @property
    def cod(self) -> CubicalSet:
        return self.map.cod


def pushout_product(f: PresheafMap, g: PresheafMap, target: TensorWitness | None = None) -> LeibnizProduct:
    A, B, C, D = f.dom, f.cod, g.dom, g.cod
    AC, BC, AD = tensor(A, C), tensor(B, C), tensor(A, D)
    BD = target or tensor(B, D)
    idA, idB, idC, idD = (ps.identity(Z) for Z in (A, B, C, D))
    f_C = tensor_map(f, idC, AC, BC)
    A_g = tensor_map(idA, g, AC, AD)
    Q, inl, inr = ps.pushout(f_C, A_g, label=f"corner({f.label},{g.label})")
    B_g = tensor_map(idB, g, BC, BD)
    f_D = tensor_map(f, idD, AD, BD)
    gap = ps.copair(Q, inl, inr, B_g, f_D, label=f"{f.label}^@{g.label}")
    return LeibnizProduct(gap, Q, inl, inr, BD)


# ----------------------------------------------------------- path shift P

def pshift(X: CubicalSet) -> CubicalSet:
    if X.trunc < 1:
        raise BudgetError(f"pshift needs budget >= 1, {X.label} has {X.trunc}")
    site, d = X.site, X.trunc - 1
    tabs = []
    for n in range(d + 1):
        cols = site.into[n][: site.n_into(n, d)]
        ext = [site.col[site.widen(f)] for f in cols]
        tabs.append(X.R[n + 1][:, ext])
    return CubicalSet(site, d, X.keys[1:], tabs,
                      names=[X.names(n) for n in range(1, X.trunc + 1)],
                      label=f"P{X.label}", check=False)


def pshift_map(f: PresheafMap, dom: CubicalSet | None = None, cod: CubicalSet | None = None) -> PresheafMap:
    dom = dom or pshift(f.dom)
    cod = cod or pshift(f.cod)
    return PresheafMap(dom, cod, f.comp[1:], label=f"P{f.label}", check=False)


def const_path(X: CubicalSet, PX: CubicalSet | None = None) -> PresheafMap:
    """``X -> P X`` sending a cell to its degeneracy along a fresh last variable."""
    PX = PX or pshift(X)
    site = X.site
    comp = [X.R[n][:, site.col[site.projection(n)]] for n in range(PX.trunc + 1)]
    return PresheafMap(X.truncate(PX.trunc), PX, comp, label=f"r_{X.label}", check=False)


def eval_end(X: CubicalSet, eps: int, PX: CubicalSet | None = None) -> PresheafMap:
    """``P X -> X`` restricting a path to its ``eps`` end."""
    PX = PX or pshift(X)
    site = X.site
    comp = [X.R[n + 1][:, site.col[site.face(n + 1, n + 1, eps)]] for n in range(PX.trunc + 1)]
    return PresheafMap(PX, X.truncate(PX.trunc), comp, label=f"ev{eps}", check=False)


# ------------------------------------------------------------ transposition

def generic_cell(tw: TensorWitness, n: int, z: int) -> int:
    """The cell ``(z . proj, v_{n+1})`` of ``Z (x) I`` at level ``n+1``."""
    site = tw.left.site
    zz = tw.left.restrict(site.projection(n), z)
    t = tw.right.index(n + 1, site.lookup(n + 1, (var(n + 1),)))
    return tw.pair(n + 1, zz, t)


def generic_part(tw: TensorWitness) -> Subpresheaf:
    """Cells of ``Z (x) I`` reachable from generic cells whose ``Z`` part sits below the budget.

    This is the part of the tensor a map out of ``Z`` into ``P X`` determines;
    when ``Z`` is representable below the budget it is the whole tensor.
    """
    T = tw.product
    gens = [(n + 1, generic_cell(tw, n, z)) for n in range(T.trunc) for z in range(tw.left.size(n))]
    return ps.generated(T, gens)


def transpose_up(h: PresheafMap, tw: TensorWitness, PX: CubicalSet | None = None) -> PresheafMap:
    """``h : Z (x) I -> X`` (or defined on its generic part) to ``Z -> P X``."""
    X = h.cod
    PX = PX or pshift(X)
    T = tw.product
    back = None
    if h.dom is not T:
        back = [{k: i for i, k in enumerate(h.dom.keys[n])} for n in range(h.trunc + 1)]
    comp = []
    for n in range(PX.trunc + 1):
        vals = []
        for z in range(tw.left.size(n)):
            g = generic_cell(tw, n, z)
            if back is not None:
                g = back[n + 1][T.keys[n + 1][g]]
            vals.append(h.comp[n + 1][g])
        comp.append(np.asarray(vals, dtype=np.int64))
    return PresheafMap(tw.left.truncate(PX.trunc), PX, comp, label=f"up({h.label})")


def _generic_witnesses(tw: TensorWitness):
    """The generic part as an object, plus one factorization per cell.

    For a cell ``c`` at level ``m`` the witness ``(k, z, j)`` says that ``c``
    is the restriction of the generic cell of ``z`` (level ``k``) along the
    ``j``-th arrow into ``k+1``.
    """
    cached = getattr(tw, "_generic", None)
    if cached is not None:
        return cached
    T = tw.product
    G, incl = generic_part(tw).to_object(label=f"gen({T.label})")
    wit = [np.full((G.size(m), 3), -1, dtype=np.int64) for m in range(G.trunc + 1)]
    site = T.site
    for k in range(T.trunc):
        cols = G.columns(k + 1)
        srcs = site.src_arr[cols]
        for z in range(tw.left.size(k)):
            g = G.index(k + 1, T.keys[k + 1][generic_cell(tw, k, z)])
            row = G.R[k + 1][g]
            for m in range(k + 2):
                js = np.nonzero(srcs == m)[0]
                cells = row[js]
                fresh = wit[m][cells, 0] < 0
                wit[m][cells[fresh]] = np.stack(
                    [np.full(fresh.sum(), k), np.full(fresh.sum(), z), js[fresh]], axis=1)
    tw._generic = (G, incl, wit)
    return tw._generic


def transpose_down(psi: PresheafMap, tw: TensorWitness, X: CubicalSet) -> PresheafMap:
    """``psi : Z -> P X`` to the map out of the generic part of ``Z (x) I`` into ``X``.

    Every generic-part cell is a restriction ``rho^* (z . proj, v)`` and is
    sent to ``rho^* psi(z)``; the result is naturality-checked.
    """
    G, _, wit = _generic_witnesses(tw)
    vals = []
    for m in range(G.trunc + 1):
        w = wit[m]
        out = np.empty(G.size(m), dtype=np.int64)
        for k in np.unique(w[:, 0]) if w.size else []:
            sel = w[:, 0] == k
            out[sel] = X.R[k + 1][psi.comp[k][w[sel, 1]], w[sel, 2]]
        vals.append(out)
    return PresheafMap(G, X.truncate(G.trunc), vals, label=f"down({psi.label})")


def generic_object(tw: TensorWitness) -> tuple[CubicalSet, PresheafMap]:
    G, incl, _ = _generic_witnesses(tw)
    return G, incl


# ------------------------------------------------------------ pullback homs

@dataclass
class PullbackHom:
    gap: PresheafMap          # P X -> corner
    corner: CubicalSet
    to_base: PresheafMap      # corner -> X (or X x X)
    to_path: PresheafMap      # corner -> P Y


def pullback_hom_endpoint(eps: int, f: PresheafMap) -> PullbackHom:
    """``<d_eps, f> : P X -> X x_Y P Y``."""
    X, Y = f.dom, f.cod
    PX, PY = pshift(X), pshift(Y)
    d = PX.trunc
    evY = eval_end(Y, eps, PY)
    corner, to_x, to_p = ps.pullback(f.truncate(d), evY, label=f"{X.label}x_{Y.label}P{Y.label}")
    gap = ps.pairing(corner, eval_end(X, eps, PX), pshift_map(f, PX, PY), label=f"<d{eps},{f.label}>")
    return PullbackHom(gap, corner, to_x, to_p)


def pullback_hom_boundary(f: PresheafMap) -> PullbackHom:
    """``<[d0,d1], f> : P X -> (X x X) x_{Y x Y} P Y``."""
    X, Y = f.dom, f.cod
    PX, PY = pshift(X), pshift(Y)
    d = PX.trunc
    Xd, Yd = X.truncate(d), Y.truncate(d)
    XX, a0, a1 = ps.product(Xd, Xd)
    YY, b0, b1 = ps.product(Yd, Yd)
    fd = f.truncate(d)
    ff = ps.pairing(YY, a0.then(fd), a1.then(fd), label="fxf")
    ends = ps.pairing(YY, eval_end(Y, 0, PY), eval_end(Y, 1, PY), label="<ev0,ev1>")
    corner, to_xx, to_p = ps.pullback(ff, ends, label=f"corner<bd,{f.label}>")
    endsX = ps.pairing(XX, eval_end(X, 0, PX), eval_end(X, 1, PX))
    gap = ps.pairing(corner, endsX, pshift_map(f, PX, PY), label=f"<bd,{f.label}>")
    return PullbackHom(gap, corner, to_xx, to_p)


# ------------------------------------------------------------- connections

def connections(I: Interval) -> tuple[PresheafMap, PresheafMap, TensorWitness]:
    """``min`` and ``max`` as maps ``I (x) I -> I`` (connections mode)."""
    site = I.carrier.site
    if not site.mode.connections:
        raise PresheafError("connections need the connections mode")
    tw = tensor(I.carrier, I.carrier)
    maps = []
    for op, name in ((meet, "min"), (join, "max")):
        comp = []
        for n in range(tw.product.trunc + 1):
            keys = I.carrier.keys[n]
            comp.append(np.asarray([
                I.carrier.index(n, site.lookup(n, (op(site.coords[keys[a]][0], site.coords[keys[b]][0]),)))
                for a, b in tw.product.keys[n]], dtype=np.int64))
        maps.append(PresheafMap(tw.product, I.carrier, comp, label=name))
    return maps[0], maps[1], tw


def connection_equations(I: Interval) -> dict[str, bool]:
    """The min/max connection laws, checked on every cell pair."""
    cmin, cmax, tw = connections(I)
    site = I.carrier.site
    ok = {name: True for name in ("min(s,0)=0", "min(s,1)=s", "max(s,0)=s", "max(s,1)=1", "symmetric")}
    for n in range(tw.product.trunc + 1):
        keys = I.carrier.keys[n]
        zero = I.carrier.index(n, site.lookup(n, (ZERO,)))
        one = I.carrier.index(n, site.lookup(n, (ONE,)))
        for k, (a, b) in enumerate(tw.product.keys[n]):
            lo, hi = cmin(n, k), cmax(n, k)
            if b == zero:
                ok["min(s,0)=0"] &= lo == zero
                ok["max(s,0)=s"] &= hi == a
            if b == one:
                ok["min(s,1)=s"] &= lo == a
                ok["max(s,1)=1"] &= hi == one
            k2 = tw.pair(n, b, a)
            ok["symmetric"] &= cmin(n, k2) == lo and cmax(n, k2) == hi
    return ok


# --------------------------------------------------------------- symmetry

@dataclass
class IsoWitness:
    iso: PresheafMap
    left: PresheafMap
    right: PresheafMap
    verified: bool


def symmetry_iso(m: PresheafMap, eps: int, I: Interval) -> IsoWitness:
    """``(m (x)^ d_eps) (x)^ [d0,d1]  ~=  (m (x)^ [d0,d1]) (x)^ d_eps``.

    Both gap maps land in ``(B (x) I) (x) I``; swapping the two interval
    factors carries the image of one onto the image of the other, and the
    induced bijection between the corners is the witness.
    """
    B = m.cod
    BI = tensor(B, I.carrier)
    BII = tensor(BI.product, I.carrier)
    de = I.endpoint(eps)
    lhs_in = pushout_product(m, de, target=BI)
    lhs = pushout_product(lhs_in.map, I.bdry, target=BII)
    rhs_in = pushout_product(m, I.bdry, target=BI)
    rhs = pushout_product(rhs_in.map, de, target=BII)
    T = BII.product
    sigma = []
    for n in range(T.trunc + 1):
        row = []
        for bi, t in T.keys[n]:
            b, s = BI.product.keys[n][bi]
            inner = BI.pair(n, b, t)
            row.append(-1 if inner is None else BII.pair(n, inner, s))
        sigma.append(np.asarray(row, dtype=np.int64))
    sig = PresheafMap(T, T, sigma, label="swap23")
    comp, verified = [], lhs.map.is_mono() and rhs.map.is_mono()
    for n in range(T.trunc + 1):
        where = {int(c): i for i, c in enumerate(rhs.map.comp[n])}
        row = []
        for c in lhs.map.comp[n]:
            j = where.get(int(sig.comp[n][c]), -1)
            verified &= j >= 0
            row.append(max(j, 0))
        comp.append(np.asarray(row, dtype=np.int64))
    iso = PresheafMap(lhs.dom, rhs.dom, comp, label="sym", check=False)
    verified = verified and iso.naturality_violations() == 0 and iso.is_iso() and ps.commutes(
        (iso, rhs.map), (lhs.map, sig))
    return IsoWitness(iso, lhs.map, rhs.map, bool(verified))


# ------------------------------------------------------- boundary as product

def iterated_boundary(site: Site, n: int, trunc: int, I: Interval | None = None) -> PresheafMap:
    """``[d0,d1] (x)^ ... (x)^ [d0,d1]`` (``n`` factors), composed into ``y(n)``."""
    if n < 1:
        raise PresheafError("the iterated boundary needs n >= 1")
    I = I or interval(site, trunc)
    m = I.bdry
    for k in range(1, n):
        tw = tensor(m.cod, I.carrier)
        lp = pushout_product(m, I.bdry, target=tw)
        m = lp.map.then(cube_tensor_iso(site, k, 1, trunc, tw))
    m.label = f"bd^{n}"
    return m


def boundary_iso(site: Site, n: int, trunc: int, I: Interval | None = None) -> IsoWitness:
    """Iso between the iterated pushout product and the boundary inclusion over ``y(n)``."""
    m = iterated_boundary(site, n, trunc, I)
    B, incl = ps.boundary(site, n, trunc).to_object(label=f"bd({n})")
    verified = m.is_mono()
    comp = []
    for k in range(trunc + 1):
        where = {int(c): i for i, c in enumerate(incl.comp[k])}
        row = [where.get(int(c), -1) for c in m.comp[k]]
        verified &= min(row, default=0) >= 0
        comp.append(np.asarray([max(r, 0) for r in row], dtype=np.int64))
    iso = PresheafMap(m.dom, B, comp, label="bd-iso", check=False)
    verified = verified and iso.naturality_violations() == 0 and iso.is_iso() and ps.commutes((iso, incl), (m,))
    return IsoWitness(iso, m, incl, bool(verified))
