"""The partial-lift factorization ``f = F1t(f) . C1(f)``.

A cell of ``E(f)`` at level ``k`` is a *partial lift*: a base cell ``y`` of
``Y_k``, a sieve ``S`` on ``y(k)`` and a natural family of ``X``-cells over
``S`` lying over the restrictions of ``y``.  ``C1`` sends ``x`` to the total
partial lift, ``F1t`` forgets everything but the base.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lifting import CofStructure, TFibStructure
from .presheaf import BudgetError, CubicalSet, PresheafMap, commutes

DEFAULT_MAX_CELLS = 1_000_000


class SizeCapError(BudgetError):
    """The partial-lift object would exceed the configured cell cap."""


@dataclass(frozen=True)
class PartialLift:
    base: int
    sieve: frozenset
    family: tuple  # sorted (arrow, cell) pairs

    @property
    def fam(self) -> dict[int, int]:
        return dict(self.family)

    def key(self):
        return (self.base, self.family)


def _key(base: int, fam: dict[int, int]):
    return (base, tuple(sorted(fam.items())))


@dataclass
class StepOneFactorization:
    of: PresheafMap
    E: CubicalSet
    c1: PresheafMap
    f1t: PresheafMap
    total: list  # per level: arrows of the total sieve

    def cell(self, k: int, e: int) -> PartialLift:
        base, family = self.E.keys[k][e]
        return PartialLift(base, frozenset(g for g, _ in family), family)

    def lookup(self, k: int, base: int, fam: dict[int, int]) -> int:
        return self.E.index(k, _key(base, fam))

    def is_total(self, k: int, e: int) -> bool:
        return len(self.E.keys[k][e][1]) == len(self.total[k])


def sieves_with_generators(site, k: int, trunc: int) -> list[tuple[frozenset, tuple[int, ...]]]:
    """Every sieve on ``y(k)`` (arrows with source <= trunc) with a generating list.

    Generators are picked greedily by decreasing source, so a family on the
    sieve is fixed by its values on them.
    """
    cache = site.__dict__.setdefault("_sieves", {})
    if (k, trunc) in cache:
        return cache[(k, trunc)]
    arrows = site.into[k][: site.n_into(k, trunc)]
    down = {}
    for g in arrows:
        m = site.src[g]
        down[g] = frozenset(site.compose(g, h) for h in site.into[m][: site.n_into(m, trunc)])
    found = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for S in frontier:
            for g in arrows:
                if g not in S:
                    T = S | down[g]
                    if T not in found:
                        found.add(T)
                        nxt.append(T)
        frontier = nxt
    order = sorted(arrows, key=lambda g: (-site.src[g], g))
    out = []
    for S in sorted(found, key=lambda s: (len(s), sorted(s))):
        gens, covered = [], set()
        for g in order:
            if g in S and g not in covered:
                gens.append(g)
                covered |= down[g]
        out.append((S, tuple(gens)))
    cache[(k, trunc)] = out
    return out


def _enumerate_level(f: PresheafMap, k: int, d: int, cap: int) -> list:
    """All partial lifts at level ``k``.

    For each sieve, backtrack over values on its generators; candidates for
    a generator are bucketed by their restrictions to the part of its
    down-closure already fixed, so no branch is ever rejected.
    """
    X, Y, site = f.dom, f.cod, f.site
    rows = {m: X.R[m].tolist() for m in range(d + 1)}
    below = {}
    for g in site.into[k][: site.n_into(k, d)]:
        m = site.src[g]
        below[g] = [site.compose(g, h) for h in site.into[m][: site.n_into(m, d)]]
    fibers = []
    for m in range(d + 1):
        fib: dict[int, list[int]] = {}
        for x, y in enumerate(f.comp[m].tolist()):
            fib.setdefault(y, []).append(x)
        fibers.append(fib)
    plans = []
    for _, gens in sieves_with_generators(site, k, d):
        covered: set[int] = set()
        steps = []
        for g in gens:
            bl = below[g]
            ov = [j for j, gh in enumerate(bl) if gh in covered]
            # the identity column comes first so distinct values stay distinct
            ident = site.col[site.identity(site.src[g])]
            fresh, nw = set(), []
            for j, gh in [(ident, bl[ident])] + list(enumerate(bl)):
                if gh not in covered and gh not in fresh:
                    fresh.add(gh)
                    nw.append(j)
            first: dict[int, int] = {}
            same = []
            for j, gh in enumerate(bl):
                if first.setdefault(gh, j) != j:
                    same.append((first[gh], j))
            covered |= fresh
            steps.append((g, bl, ov, nw, same))
        plans.append(steps)
    ycols = Y.R[k].tolist()
    out = []
    for y in range(Y.size(k)):
        yrow = ycols[y]
        for steps in plans:
            opts = []
            for g, bl, ov, nw, same in steps:
                xrows = rows[site.src[g]]
                groups: dict[tuple, list] = {}
                for x in fibers[site.src[g]].get(yrow[site.col[g]], ()):
                    r = xrows[x]
                    # arrows h, h' with g.h = g.h' must see the same restriction
                    if any(r[a] != r[b] for a, b in same):
                        continue
                    groups.setdefault(tuple(r[j] for j in ov), []).append([(bl[j], r[j]) for j in nw])
                opts.append((bl, ov, groups))

            def walk(i, fam):
                if i == len(opts):
                    out.append((y, tuple(sorted(fam.items()))))
                    if len(out) > cap:
                        raise SizeCapError(f"partial lifts at level {k} exceed cap {cap}")
                    return
                bl, ov, groups = opts[i]
                for extra in groups.get(tuple(fam[bl[j]] for j in ov), ()):
                    new = dict(fam)
                    new.update(extra)
                    walk(i + 1, new)

            walk(0, {})
    out.sort(key=lambda kv: (kv[0], len(kv[1]), kv[1]))
    return out


def step_one(f: PresheafMap, max_cells: int = DEFAULT_MAX_CELLS, label: str = "") -> StepOneFactorization:
    X, Y, site, d = f.dom, f.cod, f.site, f.trunc
    keys = [_enumerate_level(f, k, d, max_cells) for k in range(d + 1)]
    index = [{kv: i for i, kv in enumerate(ks)} for ks in keys]
    tabs = []
    for k in range(d + 1):
        cols = site.into[k][: site.n_into(k, d)]
        # (sieve, column) -> arrows of the pulled-back sieve with their positions in the sieve
        plan: dict[tuple, list] = {}
        for S, _ in sieves_with_generators(site, k, d):
            arr = sorted(S)
            pos = {g: p for p, g in enumerate(arr)}
            for j, rho in enumerate(cols):
                m = site.src[rho]
                plan[(tuple(arr), j)] = sorted((h, pos[site.compose(rho, h)])
                                               for h in site.into[m][: site.n_into(m, d)]
                                               if site.compose(rho, h) in S)
        yr = Y.R[k].tolist()
        t = np.empty((len(keys[k]), len(cols)), dtype=np.int64)
        for e, (y, family) in enumerate(keys[k]):
            arr = tuple(g for g, _ in family)
            vals = [x for _, x in family]
            for j, rho in enumerate(cols):
                fam2 = tuple([(h, vals[p]) for h, p in plan[(arr, j)]])
                t[e, j] = index[site.src[rho]][(yr[y][j], fam2)]
        tabs.append(t)
    names = [[_show(site, kv) for kv in ks] for ks in keys]
    E = CubicalSet(site, d, keys, tabs, names=names, label=label or f"E({f.label})", check=False)
    total = [site.into[k][: site.n_into(k, d)] for k in range(d + 1)]
    c1 = []
    for k in range(d + 1):
        c1.append(np.asarray([index[k][_key(int(f.comp[k][x]), {g: X.restrict(g, x) for g in total[k]})]
                              for x in range(X.size(k))], dtype=np.int64))
    c1m = PresheafMap(X, E, c1, label=f"C1({f.label})", check=False)
    f1t = PresheafMap(E, Y, [np.asarray([kv[0] for kv in ks], dtype=np.int64) for ks in keys],
                      label=f"F1t({f.label})", check=False)
    return StepOneFactorization(f, E, c1m, f1t, total)


def _show(site, kv) -> str:
    y, family = kv
    if not family:
        return f"<{y}|empty>"
    return f"<{y}|" + ",".join(f"{site.name(g)}:{x}" for g, x in family) + ">"


# ----------------------------------------------------------- structures

def _spreader(s: StepOneFactorization):
    """``(g, e) -> [(g.h, x)]`` for the family ``h -> x`` of the partial lift ``e``, memoized."""
    site = s.E.site
    memo: dict[tuple[int, int], list] = {}

    def spread(g, e):
        hit = memo.get((g, e))
        if hit is None:
            hit = [(site.compose(g, h), x) for h, x in s.E.keys[site.src[g]][e][1]]
            memo[(g, e)] = hit
        return hit

    return spread


def tfib_of_f1t(s: StepOneFactorization) -> TFibStructure:
    """Extensions against ``F1t`` by flattening a family of partial lifts."""
    spread = _spreader(s)

    def tcomp(k, S, fam, y):
        flat: dict[int, int] = {}
        for g, e in fam.items():
            flat.update(spread(g, e))
        return s.lookup(k, y, flat)

    return TFibStructure(s.f1t, tcomp, label=f"mu({s.of.label})")


def cof_of_c1(s: StepOneFactorization) -> CofStructure:
    """``C1`` is mono; its complement is the non-total partial lifts."""
    comp = [np.asarray([not s.is_total(k, e) for e in range(s.E.size(k))], dtype=bool)
            for k in range(s.E.trunc + 1)]
    return CofStructure(s.c1, comp)


def comult(s: StepOneFactorization, s2: StepOneFactorization) -> PresheafMap:
    """``E(f) -> E(C1 f)``: a partial lift becomes a partial lift of itself.

    ``s2`` must be the factorization of ``s.c1``.
    """
    comp = []
    for k in range(s.E.trunc + 1):
        comp.append(np.asarray([s2.lookup(k, e, dict(s.E.keys[k][e][1])) for e in range(s.E.size(k))],
                               dtype=np.int64))
    return PresheafMap(s.E, s2.E, comp, label="comult", check=False)


def functorial(s: StepOneFactorization, s2: StepOneFactorization, a: PresheafMap, b: PresheafMap) -> PresheafMap:
    """``E(f) -> E(f')`` induced by a square ``(a, b) : f -> f'``."""
    comp = []
    for k in range(s.E.trunc + 1):
        row = []
        for y, family in s.E.keys[k]:
            m_of = s.E.site.src
            row.append(s2.lookup(k, b(k, y), {g: a(m_of[g], x) for g, x in family}))
        comp.append(np.asarray(row, dtype=np.int64))
    return PresheafMap(s.E, s2.E, comp, label="E(a,b)", check=False)


def mu_multiply(s: StepOneFactorization, s2: StepOneFactorization) -> PresheafMap:
    """``E(F1t f) -> E(f)``: flatten a partial lift of partial lifts.

    ``s2`` must be the factorization of ``s.f1t``.
    """
    site = s.E.site
    spread = _spreader(s)
    comp = []
    for k in range(s2.E.trunc + 1):
        row = []
        for y, family in s2.E.keys[k]:
            flat: dict[int, int] = {}
            for g, e in family:
                flat.update(spread(g, e))
            row.append(s.lookup(k, y, flat))
        comp.append(np.asarray(row, dtype=np.int64))
    return PresheafMap(s2.E, s.E, comp, label="mu", check=False)


def factorization_laws(f, max_cells: int = DEFAULT_MAX_CELLS) -> list[tuple[str, str, bool]]:
    """Unit and associativity of the multiplication on partial lifts."""
    s = step_one(f, max_cells=max_cells)
    s2 = step_one(s.f1t, max_cells=max_cells)
    s3 = step_one(s2.f1t, max_cells=max_cells)
    mu, mu2 = mu_multiply(s, s2), mu_multiply(s2, s3)
    one_E = _identity(s.E)
    Y = f.cod
    return [
        ("mu . C1(F1t f) = 1", _span(s.E), commutes((s2.c1, mu), (one_E,))),
        ("mu . E(C1 f, 1) = 1", _span(s.E),
         commutes((functorial(s, s2, s.c1, _identity(Y)), mu), (one_E,))),
        ("mu . E(mu, 1) = mu . mu", _span(s3.E),
         commutes((functorial(s3, s2, mu, _identity(Y)), mu), (mu2, mu))),
    ]


def _span(X: CubicalSet) -> str:
    s = X.sizes()
    return f"levels 0..{len(s) - 1} of {X.label or 'object'} ({'+'.join(map(str, s))} cells)"


# ----------------------------------------------------------- coalgebras

@dataclass
class CoalgebraWitness:
    """``s : cod c -> E(c)`` with ``F1t . s = 1`` and ``s . c = C1 c``."""

    cof: CofStructure
    section: PresheafMap
    factorization: StepOneFactorization
    counit: bool
    unit: bool
    coassociative: bool | None = None

    @property
    def ok(self) -> bool:
        return self.counit and self.unit and self.coassociative is not False


def fix_cofib(c: CofStructure, check_coassociativity: bool = True,
              max_cells: int = DEFAULT_MAX_CELLS) -> CoalgebraWitness:
    """Coalgebra structure on a mono: each cell lifts as far as it lies in the image.

    A cell ``b`` becomes the partial lift over ``b`` defined on the arrows
    that restrict it into the image, with the unique preimages as values.
    """
    m = c.map
    s = step_one(m, max_cells=max_cells)
    B, site = m.cod, m.site
    back = c.preimage()
    comp = []
    for k in range(m.trunc + 1):
        cols = s.total[k]
        row = []
        for b in range(B.size(k)):
            fam = {}
            for g in cols:
                x = back[site.src[g]][B.restrict(g, b)]
                if x >= 0:
                    fam[g] = int(x)
            row.append(s.lookup(k, b, fam))
        comp.append(np.asarray(row, dtype=np.int64))
    sec = PresheafMap(B, s.E, comp, label=f"coalg({m.label})")
    counit = sec.then(s.f1t).equals(_identity(B))
    unit = m.then(sec).equals(s.c1)
    coassoc = None
    if check_coassociativity:
        s2 = step_one(s.c1, max_cells=max_cells)
        lhs = sec.then(comult(s, s2))
        rhs = sec.then(functorial(s, s2, _identity(m.dom), sec))
        coassoc = lhs.equals(rhs)
    return CoalgebraWitness(c, sec, s, counit, unit, coassoc)


def _identity(X: CubicalSet) -> PresheafMap:
    return PresheafMap(X, X, [np.arange(X.size(n), dtype=np.int64) for n in range(X.trunc + 1)],
                       label=f"id_{X.label}", check=False)
