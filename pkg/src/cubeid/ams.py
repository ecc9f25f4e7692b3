"""Algebraic model structures with structured weak equivalences, as records of operations.

The generic layer knows nothing about presheaves: a :class:`Category` says
how to compose and compare maps, an :class:`Engine` is a functorial
factorization with its canonical structures, and a :class:`SweCategory`
holds the weak-equivalence slots.  Two instances are provided: a
degenerate one on finite sets where every structure is unique, and the
cubical one, whose slots are filled operationally from deformation
retracts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from . import lifting as lf
from . import pathobj as po
from . import presheaf as ps
from . import stepone as so


class SlotError(LookupError):
    """A required operation slot is missing or does not cover the case at hand."""


# ------------------------------------------------------------------ records

@dataclass(frozen=True)
class Category:
    compose: Callable[[Any, Any], Any]      # compose(g, f) = g . f
    identity: Callable[[Any], Any]
    dom: Callable[[Any], Any]
    cod: Callable[[Any], Any]
    equal: Callable[[Any, Any], bool]


@dataclass
class Factorization:
    map: Any
    left: Any
    right: Any
    data: Any = None


@dataclass
class Engine:
    """A functorial factorization ``f = right . left`` with canonical structures."""

    name: str
    category: Category
    factor: Callable[[Any], Factorization]
    left_structure: Callable[[Factorization], Any]
    right_structure: Callable[[Factorization], Any]
    on_square: Callable[[Factorization, Factorization, Any, Any], Any] | None = None

    def check(self, f) -> bool:
        fac = self.factor(f)
        C = self.category
        return C.equal(C.compose(fac.right, fac.left), f)


@dataclass
class PreAms:
    """Two engines and the comparison from ``(C^t, F)`` to ``(C, F^t)`` data."""

    category: Category
    cof: Engine        # (C, F^t)
    tcof: Engine       # (C^t, F)
    comparison: Callable[[Any], Any]            # f -> map from the (C^t, F) middle to the (C, F^t) middle
    fib_from_tfib: Callable[[Any], Any]         # F^t structure -> F structure on the same map
    compose_fib: Callable[[Any, Any], Any]      # (F on g1, F on g2) -> F on g2 . g1

    def comparison_commutes(self, f) -> bool:
        C = self.category
        ct, c = self.tcof.factor(f), self.cof.factor(f)
        xi = self.comparison(f)
        return C.equal(C.compose(xi, ct.left), c.left) and C.equal(C.compose(c.right, xi), ct.right)


@dataclass
class WeStructure:
    map: Any
    data: Any = None
    source: str = ""


@dataclass
class ThreeForTwo:
    """Given structures on two of ``f1, f2, f3 = f2 . f1``, one on the third."""

    operation: Callable[[Any, Any, dict], WeStructure]

    def __call__(self, f1, f2, given: dict[int, WeStructure]) -> WeStructure:
        if len(given) != 2 or not set(given) <= {1, 2, 3}:
            raise SlotError("3-for-2 needs structures on exactly two of f1, f2, f3")
        return self.operation(f1, f2, given)


@dataclass
class SweCategory:
    """Weak-equivalence structures with their projection and the structure slots."""

    project: Callable[[WeStructure], Any]
    three_for_two: ThreeForTwo | None = None
    tcof_from_cof: Callable[[Any, WeStructure], Any] | None = None    # C-coalgebra + WE -> C^t
    tfib_from_fib: Callable[[Any, WeStructure], Any] | None = None    # F-algebra + WE -> F^t
    we_from_tcof: Callable[[Any, Any], WeStructure] | None = None     # (map, C^t) -> WE
    we_from_tfib: Callable[[Any, Any], WeStructure] | None = None     # (map, F^t) -> WE

    def slot(self, name: str):
        fn = getattr(self, name)
        if fn is None:
            raise SlotError(f"missing slot {name}")
        return fn


# ------------------------------------------------------------- translations

def swe_from_ftfactor(pre: PreAms, swe: SweCategory, f, ft_on_Ff) -> WeStructure:
    """An ``F^t`` structure on ``F f`` gives a weak equivalence structure on ``f``."""
    fac = pre.tcof.factor(f)
    w_left = swe.slot("we_from_tcof")(fac.left, pre.tcof.left_structure(fac))
    w_right = swe.slot("we_from_tfib")(fac.right, ft_on_Ff)
    return swe.slot("three_for_two")(fac.left, fac.right, {1: w_left, 2: w_right})


def ftfactor_from_swe(pre: PreAms, swe: SweCategory, f, w: WeStructure):
    """A weak equivalence structure on ``f`` gives an ``F^t`` structure on ``F f``."""
    fac = pre.tcof.factor(f)
    w_left = swe.slot("we_from_tcof")(fac.left, pre.tcof.left_structure(fac))
    w_right = swe.slot("three_for_two")(fac.left, fac.right, {1: w_left, 3: w})
    return swe.slot("tfib_from_fib")(pre.tcof.right_structure(fac), w_right)


@dataclass
class VeryGoodPathObject:
    of: Any
    carrier: Any
    refl: Any
    p: Any
    refl_tcof: Any
    p_fib: Any
    steps: list = field(default_factory=list)


@dataclass
class PathObjectChoice:
    """``f |-> (r_f, p_f, WE on r_f, F structure on p_f)``."""

    build: Callable[[Any, Any], tuple]


def strfromwk(pre: PreAms, swe: SweCategory, paths: PathObjectChoice, f, fib) -> VeryGoodPathObject:
    """Upgrade a path object with a weak equivalence ``r_f`` to a very good one.

    Factor ``r_f`` with ``(C, F^t)``, give ``C r_f`` a weak equivalence
    structure by 3-for-2, turn it into a trivial cofibration, and compose the
    fibration structures on ``F^t r_f`` and ``p_f``.
    """
    C = pre.category
    r, pf, w_r, pf_fib = paths.build(f, fib)
    fac = pre.cof.factor(r)
    steps = ["factor r_f"]
    w_right = swe.slot("we_from_tfib")(fac.right, pre.cof.right_structure(fac))
    w_left = swe.slot("three_for_two")(fac.left, fac.right, {2: w_right, 3: w_r})
    steps.append("3-for-2 on C r_f")
    tcof = swe.slot("tcof_from_cof")(pre.cof.left_structure(fac), w_left)
    steps.append("upgrade C r_f")
    p = C.compose(pf, fac.right)
    p_fib = None
    if pf_fib is not None:
        p_fib = pre.compose_fib(pre.fib_from_tfib(pre.cof.right_structure(fac)), pf_fib)
        steps.append("compose fibrations")
    return VeryGoodPathObject(f, C.cod(fac.left), fac.left, p, tcof, p_fib, steps)


def retract_ftalg(section, retraction, f, t_on_g, retract_tfib: Callable):
    """An ``F^t`` structure on ``g`` moved to its retract ``f``.

    ``section : dom f -> dom g`` and ``retraction : dom g -> dom f`` split,
    commute with ``f`` and ``g`` over the common codomain.
    """
    return retract_tfib(t_on_g, section, retraction, f)


# ------------------------------------------------------------ pointwise lift

@dataclass
class FiniteCategory:
    objects: list
    arrows: dict                    # name -> (dom, cod)
    compose: dict = field(default_factory=dict)   # (g, f) -> g . f for composable non-identity pairs

    def identity(self, a) -> str:
        return f"id_{a}"

    def all_arrows(self) -> dict:
        out = {self.identity(a): (a, a) for a in self.objects}
        out.update(self.arrows)
        return out


def terminal_category() -> FiniteCategory:
    return FiniteCategory(["*"], {})


def walking_arrow() -> FiniteCategory:
    return FiniteCategory(["0", "1"], {"u": ("0", "1")})


@dataclass
class Diagram:
    """A functor ``A -> C``: objects and the images of arrows."""

    index: FiniteCategory
    objects: dict
    arrows: dict

    def arrow(self, name: str, C: Category):
        """Image of ``name``; identities need not be listed."""
        if name in self.arrows:
            return self.arrows[name]
        for a in self.index.objects:
            if name == self.index.identity(a):
                return C.identity(self.objects[a])
        raise SlotError(f"diagram has no arrow {name}")


@dataclass
class DiagramMap:
    dom: Diagram
    cod: Diagram
    components: dict


@dataclass
class PointwiseFactorization:
    map: DiagramMap
    middle: Diagram
    left: DiagramMap
    right: DiagramMap
    naturality: dict


def pointwise_lift(engine: Engine, index: FiniteCategory) -> Callable[[DiagramMap], PointwiseFactorization]:
    """Factor a map of ``A``-diagrams at each object; arrows act through the engine's square functoriality."""
    C = engine.category

    def factor(m: DiagramMap) -> PointwiseFactorization:
        facs = {a: engine.factor(m.components[a]) for a in index.objects}
        mids, acts, nat = {}, {}, {}
        for a in index.objects:
            mids[a] = C.cod(facs[a].left)
        for name, (a, b) in index.all_arrows().items():
            if a == b and name == index.identity(a):
                acts[name] = C.identity(mids[a])
            else:
                if engine.on_square is None:
                    raise SlotError(f"{engine.name} has no square functoriality")
                acts[name] = engine.on_square(facs[a], facs[b], m.dom.arrow(name, C), m.cod.arrow(name, C))
            nat[name] = (C.equal(C.compose(acts[name], facs[a].left), C.compose(facs[b].left, m.dom.arrow(name, C)))
                         and C.equal(C.compose(facs[b].right, acts[name]),
                                     C.compose(m.cod.arrow(name, C), facs[a].right)))
        middle = Diagram(index, mids, acts)
        left = DiagramMap(m.dom, middle, {a: facs[a].left for a in index.objects})
        right = DiagramMap(middle, m.cod, {a: facs[a].right for a in index.objects})
        return PointwiseFactorization(m, middle, left, right, nat)

    return factor


# ------------------------------------------------------ degenerate instance

@dataclass(frozen=True)
class FinMap:
    dom: int
    cod: int
    table: tuple

    def __post_init__(self):
        if len(self.table) != self.dom or any(not 0 <= v < self.cod for v in self.table):
            raise ValueError("not a function")


FINSET = Category(
    compose=lambda g, f: FinMap(f.dom, g.cod, tuple(g.table[v] for v in f.table)),
    identity=lambda n: FinMap(n, n, tuple(range(n))),
    dom=lambda f: f.dom,
    cod=lambda f: f.cod,
    equal=lambda f, g: f == g,
)

UNIT = ()


def degenerate_instance() -> tuple[PreAms, SweCategory]:
    """Every map is in every class with the unique structure ``()``; both engines are ``f = f . 1``."""
    def factor(f):
        return Factorization(f, FINSET.identity(f.dom), f)

    eng = lambda name: Engine(name, FINSET, factor, lambda fac: UNIT, lambda fac: UNIT,
                              on_square=lambda fa, fb, top, bottom: top)
    pre = PreAms(FINSET, eng("C,Ft"), eng("Ct,F"), comparison=lambda f: FINSET.identity(f.dom),
                 fib_from_tfib=lambda s: UNIT, compose_fib=lambda a, b: UNIT)

    def t42(f1, f2, given):
        k = ({1, 2, 3} - set(given)).pop()
        m = {1: f1, 2: f2, 3: FINSET.compose(f2, f1)}[k]
        return WeStructure(m, UNIT, "degenerate")

    swe = SweCategory(project=lambda w: w.map, three_for_two=ThreeForTwo(t42),
                      tcof_from_cof=lambda c, w: UNIT, tfib_from_fib=lambda a, w: UNIT,
                      we_from_tcof=lambda m, s: WeStructure(m, UNIT, "degenerate"),
                      we_from_tfib=lambda m, s: WeStructure(m, UNIT, "degenerate"))
    return pre, swe


def degenerate_paths() -> PathObjectChoice:
    """Diagonal of ``f`` factored as ``1`` then the diagonal itself."""
    def build(f, fib):
        diag, _ = finset_diagonal(f)
        return diag, FINSET.identity(diag.cod), WeStructure(diag, UNIT, "degenerate"), UNIT
    return PathObjectChoice(build)


def finset_diagonal(f: FinMap) -> tuple[FinMap, list]:
    pairs = [(a, b) for a in range(f.dom) for b in range(f.dom) if f.table[a] == f.table[b]]
    idx = {p: i for i, p in enumerate(pairs)}
    return FinMap(f.dom, len(pairs), tuple(idx[(a, a)] for a in range(f.dom))), pairs


# --------------------------------------------------------- cubical instance

PRESHEAVES = Category(
    compose=lambda g, f: f.then(g),
    identity=ps.identity,
    dom=lambda f: f.dom,
    cod=lambda f: f.cod,
    equal=lambda f, g: f.dom.sizes() == g.dom.sizes() and f.cod.sizes() == g.cod.sizes() and f.equals(g),
)


class _StepOneCache:
    def __init__(self):
        self._by_map: dict[int, tuple] = {}

    def __call__(self, f: ps.PresheafMap) -> so.StepOneFactorization:
        hit = self._by_map.get(id(f))
        if hit is None or hit[0] is not f:
            hit = (f, so.step_one(f))
            self._by_map[id(f)] = hit
        return hit[1]


def cubical_instance(fibrations: dict | None = None) -> tuple[PreAms, SweCategory]:
    """Step-one as ``(C, F^t)``; ``(C^t, F)`` is the trivial factorization of maps with a fibration structure.

    A weak equivalence structure is either a trivial fibration structure on
    the map itself or one on a retraction of it.  The 3-for-2 slot covers
    the case the pipeline needs: ``f3`` a section of a trivial fibration and
    ``f2`` a trivial fibration make ``f1`` a section of their composite.
    """
    fibrations = fibrations if fibrations is not None else {}
    steps = _StepOneCache()

    def factor(f):
        s = steps(f)
        return Factorization(f, s.c1, s.f1t, s)

    def on_square(fa, fb, top, bottom):
        return so.functorial(fa.data, fb.data, top, bottom)

    cof = Engine("C1,F1t", PRESHEAVES, factor, lambda fac: so.cof_of_c1(fac.data),
                 lambda fac: so.tfib_of_f1t(fac.data), on_square)

    def fib_of(f):
        g = fibrations.get(id(f))
        if g is None or g.map is not f:
            raise SlotError(f"no fibration structure registered for {f.label}")
        return g

    tcof = Engine("1,F", PRESHEAVES, lambda f: Factorization(f, ps.identity(f.dom), f),
                  lambda fac: lf.identity_strategy(fac.map.dom), lambda fac: fib_of(fac.map),
                  lambda fa, fb, top, bottom: top)
    pre = PreAms(PRESHEAVES, cof, tcof, comparison=lambda f: steps(f).c1,
                 fib_from_tfib=lf.tfib_to_fib, compose_fib=lf.fib_compose)

    def t42(f1, f2, given):
        if set(given) == {2, 3} and given[3].source == "retract" and given[2].source == "tfib":
            i = lf.tfib_compose(given[2].data, given[3].data)
            return WeStructure(f1, i, "retract")
        raise SlotError("the operational 3-for-2 covers only (f2 trivial fibration, f3 retract)")

    def tcof_from_cof(c, w):
        if w.source != "retract":
            raise SlotError("upgrading a cofibration needs a retraction datum")
        return po.sdr_to_tcof(c, po.make_sdr(c, w.data))

    swe = SweCategory(project=lambda w: w.map, three_for_two=ThreeForTwo(t42), tcof_from_cof=tcof_from_cof,
                      tfib_from_fib=None,
                      we_from_tcof=None,
                      we_from_tfib=lambda m, t: WeStructure(m, t, "tfib"))
    return pre, swe


def cubical_paths() -> PathObjectChoice:
    """The mapping path space; ``r_f`` is a weak equivalence through the trivial fibration ``e0``."""
    def build(f, fib):
        mp = po.mapping_path_space(f, fib)
        if mp.e_tfib is None:
            raise SlotError("the mapping path space needs a fibration structure for its weak equivalence")
        return mp.r, mp.pf, WeStructure(mp.r, mp.e_tfib[0], "retract"), mp.pf_fib
    return PathObjectChoice(build)


def retract_tfib(t: lf.TFibStructure, section: ps.PresheafMap, retraction: ps.PresheafMap,
                 f: ps.PresheafMap) -> lf.TFibStructure:
    """Extensions for ``f`` read through a retract of it onto ``t.map``."""
    site = f.site
    if not (ps.commutes((section, retraction), (ps.identity(f.dom),))
            and ps.commutes((section, t.map), (f,)) and ps.commutes((retraction, f), (t.map,))):
        raise lf.LiftError("not a retract over the codomain")

    def tcomp(k, S, fam, y):
        z = t.tcomp(k, S, {g: section(site.src[g], x) for g, x in fam.items()}, y)
        return retraction(k, z)

    return lf.TFibStructure(f, tcomp, label=f"retract({t.label})")
