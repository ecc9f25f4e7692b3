"""Cofibrations, trivial fibrations, fibrations and lifting strategies.

Filling structures are stored as *generic* operations on representables.

* A trivial-fibration structure on ``f : X -> Y`` answers ``tcomp(k, S, fam, y)``:
  given a sieve ``S`` on ``y(k)`` (a frozenset of arrow ids), a natural family
  ``fam`` of ``X``-cells indexed by ``S`` and a base ``y`` in ``Y_k`` lying
  under it, return a cell of ``X_k`` extending ``fam`` over ``y``.
* A fibration structure answers ``comp(n, eps, box, fam, y)``: the same with
  a box sieve on ``y(n+1)`` that contains the ``eps`` face in the last
  direction, returning a cell of ``X_{n+1}``.

A filler for an arbitrary mono is assembled cell by cell from the generic
operation applied to the problem pulled back along each cell, so uniformity
of fillers amounts to naturality of the generic operation under site arrows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import leibniz as lz
from . import presheaf as ps
from .presheaf import BudgetError, CubicalSet, PresheafError, PresheafMap, Subpresheaf
from .site import ONE, ZERO, Site, is_constant

Sieve = frozenset
Family = tuple  # sorted tuple of (arrow id, cell index)


class LiftError(PresheafError):
    """No filler exists, or a produced filler fails a triangle."""


def fam_key(fam: dict[int, int]) -> Family:
    return tuple(sorted(fam.items()))


def pull_sieve(site: Site, rho: int, sieve: Sieve, trunc: int) -> Sieve:
    """``rho^* S``: arrows ``h`` into ``src(rho)`` with ``rho . h`` in ``S``."""
    k = site.src[rho]
    return frozenset(h for h in site.into[k][: site.n_into(k, trunc)] if site.compose(rho, h) in sieve)


def pull_family(site: Site, rho: int, sieve: Sieve, fam: dict[int, int]) -> dict[int, int]:
    return {h: fam[site.compose(rho, h)] for h in sieve}


def is_sieve(site: Site, sieve: Sieve, trunc: int) -> bool:
    for g in sieve:
        m = site.src[g]
        for h in site.into[m][: site.n_into(m, trunc)]:
            if site.compose(g, h) not in sieve:
                return False
    return True


# ------------------------------------------------------------ cofibrations

@dataclass
class CofStructure:
    map: PresheafMap
    complement: list = field(default_factory=list)

    def __post_init__(self):
        if not self.map.is_mono():
            raise LiftError(f"{self.map!r} is not a mono")
        if not self.complement:
            img = self.map.image().member
            self.complement = [~m for m in img]

    def image(self) -> list[np.ndarray]:
        return [~c for c in self.complement]

    def preimage(self) -> list[np.ndarray]:
        """``cod`` cell index -> ``dom`` cell index (or -1)."""
        out = []
        for n, c in enumerate(self.map.comp):
            back = np.full(self.map.cod.size(n), -1, dtype=np.int64)
            back[c] = np.arange(c.size)
            out.append(back)
        return out


def cof(m: PresheafMap) -> CofStructure:
    return CofStructure(m)


def subobject_cof(sub: Subpresheaf, label: str = "") -> CofStructure:
    _, incl = sub.to_object(label=label)
    return CofStructure(incl)


def cell_problems(c: CofStructure, u: PresheafMap, trunc: int):
    """Yield ``(k, b, sieve, family)`` for every cell ``b`` of ``cod c``.

    The sieve collects the arrows along which ``b`` restricts into the image
    of ``c``; the family reads ``u`` off those restrictions.
    """
    B = c.map.cod
    site = B.site
    img = c.image()
    back = c.preimage()
    for k in range(min(trunc, B.trunc) + 1):
        cols = B.columns(k)
        srcs = site.src_arr[cols]
        R = B.R[k]
        inside = np.zeros(R.shape, dtype=bool)
        for m in range(B.trunc + 1):
            sel = srcs == m
            if sel.any():
                inside[:, sel] = img[m][R[:, sel]]
        for b in range(B.size(k)):
            js = np.nonzero(inside[b])[0]
            sieve = frozenset(cols[j] for j in js)
            fam = {cols[j]: int(u.comp[srcs[j]][back[srcs[j]][R[b, j]]]) for j in js}
            yield k, b, sieve, fam


# --------------------------------------------------------- trivial fibrations

TComp = Callable[[int, Sieve, dict, int], int]


class TFibStructure:
    """Chosen extensions against every mono, given by a generic operation."""

    def __init__(self, map: PresheafMap, tcomp: TComp, label: str = "", note: str = ""):
        self.map = map
        self._tcomp = tcomp
        self.label = label or f"tfib({map.label})"
        self.note = note
        self.cache: dict = {}

    def __repr__(self):
        return f"TFibStructure({self.label})"

    @property
    def trunc(self) -> int:
        return self.map.trunc

    def tcomp(self, k: int, sieve: Sieve, fam: dict[int, int], base: int) -> int:
        key = (k, sieve, fam_key(fam), base)
        hit = self.cache.get(key)
        if hit is None:
            if k > self.trunc:
                raise BudgetError(f"{self.label}: level {k} above budget {self.trunc}")
            hit = int(self._tcomp(k, sieve, fam, base))
            self.cache[key] = hit
        return hit

    def fill(self, c: CofStructure, u: PresheafMap, v: PresheafMap, check: bool = True) -> PresheafMap:
        """Diagonal filler ``B -> X`` for the square ``f . u = v . c``."""
        B = c.map.cod
        if B.trunc != self.trunc:
            raise BudgetError(f"{self.label}: problem budget {B.trunc} != structure budget {self.trunc}")
        if check and not ps.commutes((u, self.map), (c.map, v)):
            raise LiftError("lifting square does not commute")
        comp = [np.empty(B.size(k), dtype=np.int64) for k in range(B.trunc + 1)]
        for k, b, sieve, fam in cell_problems(c, u, B.trunc):
            comp[k][b] = self.tcomp(k, sieve, fam, int(v.comp[k][b]))
        filler = PresheafMap(B, self.map.dom, comp, label=f"fill[{self.label}]", check=False)
        if check:
            check_triangles(c.map, self.map, u, v, filler)
        return filler


def check_triangles(c: PresheafMap, f: PresheafMap, u: PresheafMap, v: PresheafMap, filler: PresheafMap) -> None:
    d = filler.trunc
    if filler.naturality_violations():
        raise LiftError("filler is not natural")
    if not ps.commutes((c.truncate(d), filler), (u.truncate(d),)):
        raise LiftError("upper triangle fails")
    if not ps.commutes((filler, f.truncate(d)), (v.truncate(d),)):
        raise LiftError("lower triangle fails")


def tfib_identity(X: CubicalSet) -> TFibStructure:
    return TFibStructure(ps.identity(X), lambda k, S, fam, y: y, label=f"id_{X.label}")


def tfib_compose(t1: TFibStructure, t2: TFibStructure) -> TFibStructure:
    """Structure on ``t2.map . t1.map``: lift in the lower map, then the upper."""
    f1 = t1.map

    def tcomp(k, S, fam, z):
        y = t2.tcomp(k, S, {g: f1(t1.map.site.src[g], x) for g, x in fam.items()}, z)
        return t1.tcomp(k, S, fam, y)

    return TFibStructure(f1.then(t2.map), tcomp, label=f"{t2.label}*{t1.label}")


class PullbackIndex:
    """Inverse of ``x -> (top x, left x)`` for a verified pullback square."""

    def __init__(self, top: PresheafMap, left: PresheafMap, right: PresheafMap, bottom: PresheafMap):
        check = ps.check_pullback_square(top, left, right, bottom)
        if not check.ok:
            raise LiftError(f"square is not a pullback ({check.failures} failures)")
        self.top, self.left, self.right, self.bottom = top, left, right, bottom
        self.index = [{(int(a), int(b)): i for i, (a, b) in enumerate(zip(top.comp[n], left.comp[n]))}
                      for n in range(top.trunc + 1)]

    def lookup(self, n: int, a: int, b: int) -> int:
        return self.index[n][(a, b)]


def tfib_pullback(t: TFibStructure, top: PresheafMap, left: PresheafMap, bottom: PresheafMap) -> TFibStructure:
    """Structure on ``left`` from a pullback square onto ``t.map``."""
    pb = PullbackIndex(top, left, t.map, bottom)
    site = left.site

    def tcomp(k, S, fam, y):
        x2 = t.tcomp(k, S, {g: top(site.src[g], x) for g, x in fam.items()}, bottom(k, y))
        return pb.lookup(k, x2, y)

    return TFibStructure(left, tcomp, label=f"pb({t.label})")


def search_tfib(f: PresheafMap, label: str = "") -> TFibStructure:
    """First extension in cell order; uniformity is checked separately."""
    X = f.dom
    site = X.site

    def tcomp(k, S, fam, y):
        cands = np.nonzero(f.comp[k] == y)[0]
        if S:
            cols = np.asarray([site.col[g] for g in fam])
            want = np.asarray(list(fam.values()))
            ok = np.all(X.R[k][cands][:, cols] == want[None, :], axis=1)
            cands = cands[ok]
        if cands.size == 0:
            raise LiftError(f"no extension at level {k} over {y}")
        return int(cands[0])

    return TFibStructure(f, tcomp, label=label or f"search({f.label})", note="search")


# ---------------------------------------------------------------- fibrations

Comp = Callable[[int, int, Sieve, dict, int], int]


def box_sieve_cells(tw: lz.TensorWitness, corner: list[np.ndarray], k: int, z: int, trunc: int):
    """Box sieve on ``y(k+1)`` and positions for the generic cell of ``z``."""
    T = tw.product
    site = T.site
    g = lz.generic_cell(tw, k, z)
    cols = site.into[k + 1][: site.n_into(k + 1, trunc)]
    row = T.R[k + 1][g, : len(cols)]
    srcs = site.src_arr[cols]
    return g, cols, row, srcs


class FibStructure:
    """Chosen box fillers ``c (x)^ d_eps`` against ``f`` for every mono ``c``."""

    def __init__(self, map: PresheafMap, comp: Comp, label: str = "", note: str = ""):
        self.map = map
        self._comp = comp
        self.label = label or f"fib({map.label})"
        self.note = note
        self.cache: dict = {}

    def __repr__(self):
        return f"FibStructure({self.label})"

    @property
    def trunc(self) -> int:
        return self.map.trunc

    def comp(self, n: int, eps: int, box: Sieve, fam: dict[int, int], base: int) -> int:
        key = (n, eps, box, fam_key(fam), base)
        hit = self.cache.get(key)
        if hit is None:
            if n + 1 > self.trunc:
                raise BudgetError(f"{self.label}: box at level {n + 1} above budget {self.trunc}")
            hit = int(self._comp(n, eps, box, fam, base))
            self.cache[key] = hit
        return hit

    def fill_box(self, prob: "BoxProblem", check: bool = True) -> PresheafMap:
        """Filler ``(B (x) I) -> X`` one level below the problem's budget."""
        tw, d = prob.tensor, prob.tensor.product.trunc
        if d != self.trunc:
            raise BudgetError(f"{self.label}: problem budget {d} != structure budget {self.trunc}")
        if d < 1:
            raise BudgetError("box filling needs budget >= 1")
        T, X, site = tw.product, self.map.dom, self.map.site
        corner, back = prob.corner.member, prob.corner_index
        psi = []
        for k in range(d):
            vals = np.empty(tw.left.size(k), dtype=np.int64)
            for z in range(tw.left.size(k)):
                g, cols, row, srcs = box_sieve_cells(tw, corner, k, z, d)
                box, fam = [], {}
                for j, w in enumerate(cols):
                    m = srcs[j]
                    cell = row[j]
                    if corner[m][cell]:
                        box.append(w)
                        fam[w] = int(prob.top.comp[m][back[m][cell]])
                vals[z] = self.comp(k, prob.eps, frozenset(box), fam, int(prob.bottom.comp[k + 1][g]))
            psi.append(vals)
        filler = _assemble(tw, psi, X, d - 1)
        if check:
            incl = prob.corner_incl.truncate(d - 1)
            if filler.naturality_violations():
                raise LiftError("box filler is not natural")
            if not ps.commutes((incl, filler), (prob.top.truncate(d - 1),)):
                raise LiftError("box filler: upper triangle fails")
            if not ps.commutes((filler, self.map.truncate(d - 1)), (prob.bottom.truncate(d - 1),)):
                raise LiftError("box filler: lower triangle fails")
        return filler


def _assemble(tw: lz.TensorWitness, psi: list[np.ndarray], X: CubicalSet, d: int) -> PresheafMap:
    """Map ``(Z (x) I)_{<=d} -> X`` from generic values ``psi[k][z]`` in ``X_{k+1}``."""
    G, _, wit = lz._generic_witnesses(tw)
    T = tw.product.truncate(d)
    comp = []
    for m in range(d + 1):
        out = np.empty(T.size(m), dtype=np.int64)
        for c in range(T.size(m)):
            k, z, j = wit[m][G.index(m, T.keys[m][c])]
            out[c] = X.R[k + 1][psi[k][z], j]
        comp.append(out)
    return PresheafMap(T, X.truncate(d), comp, label="box-filler", check=False)


@dataclass
class BoxProblem:
    """Square from ``c (x)^ d_eps`` to ``f``, with the corner as a subobject of ``B (x) I``."""

    tensor: lz.TensorWitness
    eps: int
    corner: Subpresheaf
    corner_obj: CubicalSet
    corner_incl: PresheafMap
    top: PresheafMap
    bottom: PresheafMap

    @property
    def corner_index(self) -> list[np.ndarray]:
        out = []
        for n, c in enumerate(self.corner_incl.comp):
            b = np.full(self.tensor.product.size(n), -1, dtype=np.int64)
            b[c] = np.arange(c.size)
            out.append(b)
        return out


def box_corner(c: CofStructure, eps: int, tw: lz.TensorWitness) -> tuple[Subpresheaf, CubicalSet, PresheafMap]:
    """``B (x) {eps}  u  A (x) I`` inside ``B (x) I`` (``tw`` is ``B (x) I``)."""
    site = tw.product.site
    end = ONE if eps else ZERO
    img = c.image()
    member = []
    for n in range(tw.product.trunc + 1):
        is_end = np.asarray([site.coords[t] == (end,) for t in tw.right.keys[n]], dtype=bool)
        member.append(is_end[tw.pr1.comp[n]] | img[n][tw.pr0.comp[n]])
    sub = Subpresheaf(tw.product, member, check=False)
    obj, incl = sub.to_object(label=f"corner_{eps}")
    return sub, obj, incl


def fib_identity(X: CubicalSet) -> FibStructure:
    return FibStructure(ps.identity(X), lambda n, eps, box, fam, y: y, label=f"id_{X.label}")


def fib_compose(g1: FibStructure, g2: FibStructure) -> FibStructure:
    """Structure on ``g2.map . g1.map``: fill the lower map first."""
    f1 = g1.map
    site = f1.site

    def comp(n, eps, box, fam, z):
        y = g2.comp(n, eps, box, {w: f1(site.src[w], x) for w, x in fam.items()}, z)
        return g1.comp(n, eps, box, fam, y)

    return FibStructure(f1.then(g2.map), comp, label=f"{g2.label}*{g1.label}")


def fib_pullback(g: FibStructure, top: PresheafMap, left: PresheafMap, bottom: PresheafMap) -> FibStructure:
    pb = PullbackIndex(top, left, g.map, bottom)
    site = left.site

    def comp(n, eps, box, fam, y):
        x2 = g.comp(n, eps, box, {w: top(site.src[w], x) for w, x in fam.items()}, bottom(n + 1, y))
        return pb.lookup(n + 1, x2, y)

    return FibStructure(left, comp, label=f"pb({g.label})")


def tfib_to_fib(t: TFibStructure) -> FibStructure:
    """A box inclusion is a mono, so trivial-fibration extensions fill boxes."""
    return FibStructure(t.map, lambda n, eps, box, fam, y: t.tcomp(n + 1, box, fam, y),
                        label=f"fib<{t.label}>")


def search_fib(f: PresheafMap, label: str = "") -> FibStructure:
    """First box filler in cell order; uniformity is checked separately."""
    X = f.dom
    site = X.site

    def comp(n, eps, box, fam, y):
        cands = np.nonzero(f.comp[n + 1] == y)[0]
        if fam:
            cols = np.asarray([site.col[w] for w in fam])
            want = np.asarray(list(fam.values()))
            cands = cands[np.all(X.R[n + 1][cands][:, cols] == want[None, :], axis=1)]
        if cands.size == 0:
            raise LiftError(f"no box filler at level {n + 1} over {y}")
        return int(cands[0])

    return FibStructure(f, comp, label=label or f"search({f.label})", note="search")


# ------------------------------------------------------- lifting strategies

class TCofStrategy:
    """A lifting strategy for ``map`` against every fibration structure."""

    def __init__(self, map: PresheafMap, lift: Callable, label: str = "", loss: int = 0):
        self.map = map
        self._lift = lift
        self.label = label or f"tcof({map.label})"
        self.loss = loss  # levels of budget the fillers lose

    def __repr__(self):
        return f"TCofStrategy({self.label})"

    def lift(self, g: FibStructure, u: PresheafMap, v: PresheafMap) -> PresheafMap:
        return self._lift(g, u, v)


def solve_lift(t: TCofStrategy, g: FibStructure, u: PresheafMap, v: PresheafMap) -> PresheafMap:
    """Chosen diagonal filler of ``t`` against ``g``; both triangles are verified."""
    if not ps.commutes((u, g.map), (t.map, v)):
        raise LiftError("lifting square does not commute")
    filler = t.lift(g, u, v)
    check_triangles(t.map, g.map, u, v, filler)
    return filler


def identity_strategy(X: CubicalSet) -> TCofStrategy:
    return TCofStrategy(ps.identity(X), lambda g, u, v: u, label=f"id_{X.label}")


def cof_to_tcof_box(c: CofStructure, eps: int, I: lz.Interval | None = None) -> TCofStrategy:
    """Strategy on ``c (x)^ d_eps`` (as corner inclusion into ``B (x) I``)."""
    B = c.map.cod
    I = I or lz.interval(B.site, B.trunc)
    tw = lz.tensor(B, I.carrier)
    sub, obj, incl = box_corner(c, eps, tw)

    def lift(g, u, v):
        return g.fill_box(BoxProblem(tw, eps, sub, obj, incl, u, v))

    strat = TCofStrategy(incl, lift, label=f"box({c.map.label},{eps})", loss=1)
    strat.tensor = tw
    return strat


# ------------------------------------------------------------- uniformity

@dataclass
class UniformityReport:
    squares: int
    violations: int
    quantified_over: str

    @property
    def ok(self) -> bool:
        return self.violations == 0


def tfib_uniformity(t: TFibStructure, limit: int | None = None) -> UniformityReport:
    """Naturality of every cached extension under every site arrow.

    Each pair (problem on ``y(k)``, arrow ``rho : y(k') -> y(k)``) is the
    pullback square of sieve inclusions ``rho^* S -> S`` over ``rho``.
    """
    site, X, d = t.map.site, t.map.dom, t.trunc
    Y = t.map.cod
    squares = bad = 0
    for (k, S, famk, y), x in list(t.cache.items())[:limit]:
        fam = dict(famk)
        for rho in site.into[k][: site.n_into(k, d)]:
            k2 = site.src[rho]
            S2 = pull_sieve(site, rho, S, d)
            got = t.tcomp(k2, S2, pull_family(site, rho, S2, fam), Y.restrict(rho, y))
            squares += 1
            bad += got != X.restrict(rho, x)
    return UniformityReport(squares, bad, "pullback squares of sieve inclusions along all site arrows")


def fib_uniformity(g: FibStructure, limit: int | None = None) -> UniformityReport:
    """Naturality of cached box fillers under ``rho (x) I`` for all site arrows ``rho``."""
    site, X, Y, d = g.map.site, g.map.dom, g.map.cod, g.trunc
    squares = bad = 0
    for (n, eps, box, famk, y), x in list(g.cache.items())[:limit]:
        fam = dict(famk)
        for rho in site.into[n][: site.n_into(n, d - 1)]:
            W = site.widen(rho)
            box2 = pull_sieve(site, W, box, d)
            got = g.comp(site.src[rho], eps, box2, pull_family(site, W, box2, fam), Y.restrict(W, y))
            squares += 1
            bad += got != X.restrict(W, x)
    return UniformityReport(squares, bad, "pullback squares of box inclusions along rho (x) I")
