"""The truncated cube site.

Arrows ``m -> n`` are tuples of ``n`` coordinate terms over the variables
``v1..vm``.  Restricting a cell along ``f`` and then along ``g`` is the same
as restricting along the composite ``f . g``, whose coordinates are obtained
by substituting the coordinates of ``g`` into those of ``f``.

Terms are stored uniformly as antichains of variable sets (disjunctive
normal form of the free bounded distributive lattice):

    ZERO = ()            the empty join
    ONE  = ((),)         the empty meet
    v_i  = ((i,),)
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

Term = tuple  # tuple[tuple[int, ...], ...]

ZERO: Term = ()
ONE: Term = ((),)


class SiteError(ValueError):
    pass


def var(i: int) -> Term:
    return ((i,),)


def _minimize(clauses) -> Term:
    cs = sorted(set(clauses), key=lambda c: (len(c), c))
    out: list[tuple[int, ...]] = []
    for c in cs:
        sc = set(c)
        if not any(set(o) <= sc for o in out):
            out.append(c)
    return tuple(sorted(out))


def meet(a: Term, b: Term) -> Term:
    return _minimize(tuple(sorted(set(x) | set(y))) for x in a for y in b)


def join(a: Term, b: Term) -> Term:
    return _minimize(a + b)


def substitute(t: Term, args: tuple[Term, ...]) -> Term:
    """Replace ``v_i`` by ``args[i-1]`` in ``t`` and normalize."""
    acc = ZERO
    for clause in t:
        m = ONE
        for i in clause:
            m = meet(m, args[i - 1])
        acc = join(acc, m)
    return acc


def is_constant(t: Term) -> bool:
    return t == ZERO or t == ONE


def is_variable(t: Term) -> bool:
    return len(t) == 1 and len(t[0]) == 1


def variables(t: Term) -> set[int]:
    return {i for c in t for i in c}


def show_term(t: Term) -> str:
    if t == ZERO:
        return "0"
    if t == ONE:
        return "1"
    parts = []
    for c in t:
        s = "&".join(f"v{i}" for i in c)
        parts.append(s if len(c) == 1 else f"({s})")
    return "|".join(parts)


def parse_term(s: str) -> Term:
    s = s.strip()
    if s == "0":
        return ZERO
    if s == "1":
        return ONE
    clauses = []
    for part in s.split("|"):
        part = part.strip().strip("()")
        clauses.append(tuple(sorted(int(v.strip()[1:]) for v in part.split("&"))))
    return _minimize(clauses)


class Kind(str, Enum):
    AFFINE = "affine"
    CARTESIAN = "cartesian"


@dataclass(frozen=True)
class SiteMode:
    kind: Kind = Kind.AFFINE
    connections: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.connections and self.kind is not Kind.CARTESIAN:
            raise SiteError("connections require the cartesian kind")

    def __str__(self):
        return self.kind.value + ("+connections" if self.connections else "")


AFFINE = SiteMode(Kind.AFFINE)
CARTESIAN = SiteMode(Kind.CARTESIAN)
CONNECTIONS = SiteMode(Kind.CARTESIAN, connections=True)


def terms_over(m: int, mode: SiteMode) -> list[Term]:
    """All admissible coordinate terms in ``m`` variables, sorted."""
    base = [ZERO, ONE] + [var(i) for i in range(1, m + 1)]
    if not mode.connections:
        return base
    seen = set(base)
    frontier = list(base)
    while frontier:
        new = []
        for a in frontier:
            for b in list(seen):
                for c in (meet(a, b), join(a, b)):
                    if c not in seen:
                        seen.add(c)
                        new.append(c)
        frontier = new
    return sorted(seen, key=_term_key)


def _term_key(t: Term):
    return (0 if is_constant(t) else 1, len(t), t)


def valid_coords(coords: tuple[Term, ...], m: int, mode: SiteMode) -> bool:
    for t in coords:
        if any(i < 1 or i > m for i in variables(t)):
            return False
        if not mode.connections and not (is_constant(t) or is_variable(t)):
            return False
    if mode.kind is Kind.AFFINE:
        vs = [t[0][0] for t in coords if is_variable(t)]
        if len(vs) != len(set(vs)):
            return False
    return True


@dataclass(frozen=True)
class SiteMorphism:
    source_dim: int
    target_dim: int
    coords: tuple

    def __str__(self):
        return "(" + ",".join(show_term(t) for t in self.coords) + f"):{self.source_dim}"


def site_compose(f: SiteMorphism, g: SiteMorphism, mode: SiteMode | None = None) -> SiteMorphism:
    """``f`` first, then ``g``: substitute ``f``'s coordinates into ``g``'s."""
    if f.target_dim != g.source_dim:
        raise SiteError("dimension mismatch in composition")
    coords = tuple(substitute(t, f.coords) for t in g.coords)
    if mode is not None and not valid_coords(coords, f.source_dim, mode):
        raise SiteError(f"composite {show_coords(coords, f.source_dim)} is not a {mode} morphism")
    return SiteMorphism(f.source_dim, g.target_dim, coords)


def show_coords(coords, src: int) -> str:
    return "(" + ",".join(show_term(t) for t in coords) + f"):{src}"


def parse_morphism(s: str) -> tuple[int, tuple[Term, ...]]:
    body, _, src = s.strip().rpartition(":")
    body = body.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise SiteError(f"malformed morphism {s!r}")
    inner = body[1:-1].strip()
    coords = tuple(parse_term(p) for p in _split_top(inner)) if inner else ()
    return int(src), coords


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return out


class Site:
    """All arrows between cubes of dimension <= ``dim`` in a given mode.

    Arrows get global integer ids.  ``into[n]`` lists the ids of arrows with
    target ``n`` ordered by source dimension, so the arrows usable by a
    presheaf truncated at ``d`` form the prefix ``into[n][:n_into(n, d)]``.
    """

    def __init__(self, mode: SiteMode, dim: int):
        if dim < 0:
            raise SiteError("negative dimension")
        self.mode = mode
        self.dim = dim
        self.terms = [terms_over(m, mode) for m in range(dim + 1)]
        self.src: list[int] = []
        self.tgt: list[int] = []
        self.coords: list[tuple] = []
        self._id: dict[tuple[int, tuple], int] = {}
        self.hom: dict[tuple[int, int], list[int]] = {}
        for n in range(dim + 1):
            for m in range(dim + 1):
                ids = []
                for cs in itertools.product(self.terms[m], repeat=n):
                    if valid_coords(cs, m, mode):
                        mid = len(self.src)
                        self.src.append(m)
                        self.tgt.append(n)
                        self.coords.append(cs)
                        self._id[(m, cs)] = mid
                        ids.append(mid)
                self.hom[(m, n)] = ids
        self.into = [sum((self.hom[(m, n)] for m in range(dim + 1)), []) for n in range(dim + 1)]
        self.col = np.full(len(self.src), -1, dtype=np.int64)
        for n in range(dim + 1):
            for j, mid in enumerate(self.into[n]):
                self.col[mid] = j
        self.src_arr = np.asarray(self.src, dtype=np.int64)
        self._comp: dict[tuple[int, int], int] = {}
        self._names = [show_coords(c, s) for c, s in zip(self.coords, self.src)]

    def __repr__(self):
        return f"Site({self.mode}, dim={self.dim})"

    # --- lookup -------------------------------------------------------
    def n_into(self, n: int, trunc: int) -> int:
        return sum(len(self.hom[(m, n)]) for m in range(min(trunc, self.dim) + 1))

    def lookup(self, src: int, coords) -> int:
        try:
            return self._id[(src, tuple(coords))]
        except KeyError:
            raise SiteError(f"not an arrow of {self}: {show_coords(coords, src)}") from None

    def find(self, src: int, coords) -> int | None:
        return self._id.get((src, tuple(coords)))

    def name(self, mid: int) -> str:
        return self._names[mid]

    def parse(self, s: str) -> int:
        src, coords = parse_morphism(s)
        return self.lookup(src, coords)

    def morphism(self, mid: int) -> SiteMorphism:
        return SiteMorphism(self.src[mid], self.tgt[mid], self.coords[mid])

    # --- composition ----------------------------------------------------
    def compose(self, f: int, g: int) -> int:
        """``f . g``: first ``g``, then ``f`` (requires tgt(g) == src(f))."""
        key = (f, g)
        r = self._comp.get(key)
        if r is None:
            if self.tgt[g] != self.src[f]:
                raise SiteError("dimension mismatch in composition")
            gc = self.coords[g]
            cs = tuple(substitute(t, gc) for t in self.coords[f])
            r = self.lookup(self.src[g], cs)
            self._comp[key] = r
        return r

    def identity(self, n: int) -> int:
        return self.lookup(n, tuple(var(i) for i in range(1, n + 1)))

    def composition_table(self, n: int, trunc: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All composable pairs (g into n, f into src g) as column triples.

        Returns arrays ``(g_col, f_col, gf_col, mid_level)`` where ``mid_level``
        is ``src(g)``.  Used by the functoriality kernel.
        """
        cache = getattr(self, "_ctab", None)
        if cache is None:
            cache = self._ctab = {}
        key = (n, trunc)
        if key not in cache:
            gs, fs, cs, ms = [], [], [], []
            for g in self.into[n][: self.n_into(n, trunc)]:
                m = self.src[g]
                for f in self.into[m][: self.n_into(m, trunc)]:
                    gs.append(self.col[g])
                    fs.append(self.col[f])
                    cs.append(self.col[self.compose(g, f)])
                    ms.append(m)
            cache[key] = tuple(np.asarray(a, dtype=np.int64) for a in (gs, fs, cs, ms))
        return cache[key]

    # --- distinguished arrows --------------------------------------------
    def face(self, n: int, i: int, eps: int) -> int:
        """(n-1) -> n setting coordinate ``i`` to ``eps``."""
        cs = [var(j) for j in range(1, n)]
        cs.insert(i - 1, ONE if eps else ZERO)
        return self.lookup(n - 1, tuple(cs))

    def degeneracy(self, n: int, i: int) -> int:
        """n -> (n-1) forgetting variable ``i``."""
        return self.lookup(n, tuple(var(j) for j in range(1, n + 1) if j != i))

    def zero_at(self, n: int, i: int) -> int:
        """n -> n replacing ``v_i`` by 0 (used for support tests)."""
        return self.lookup(n, tuple(ZERO if j == i else var(j) for j in range(1, n + 1)))

    def projection(self, n: int) -> int:
        """(n+1) -> n dropping the last variable."""
        return self.lookup(n + 1, tuple(var(j) for j in range(1, n + 1)))

    def extend(self, g: int, t: Term) -> int | None:
        """``(g, t)``: src(g) -> tgt(g)+1, or None if not admissible."""
        return self.find(self.src[g], self.coords[g] + (t,))

    def widen(self, f: int) -> int:
        """``f (x) I``: (m+1) -> (n+1) acting as ``f`` and keeping a fresh last variable."""
        m = self.src[f]
        return self.lookup(m + 1, self.coords[f] + (var(m + 1),))

    def split_last(self, w: int) -> tuple[int, Term]:
        """Inverse of :meth:`extend`."""
        cs = self.coords[w]
        return self.lookup(self.src[w], cs[:-1]), cs[-1]

    def swap_last(self, n: int) -> int:
        """n -> n exchanging the last two coordinates (n >= 2)."""
        cs = [var(j) for j in range(1, n + 1)]
        cs[-1], cs[-2] = cs[-2], cs[-1]
        return self.lookup(n, tuple(cs))


@lru_cache(maxsize=None)
def get_site(mode: SiteMode, dim: int) -> Site:
    return Site(mode, dim)


def widen_factorizations(site: Site, trunc: int) -> dict[int, list[tuple[int, int]]]:
    """For each arrow ``u`` with source <= trunc, the pairs ``(w0, rho)`` with
    ``widen(w0) . rho = u`` and ``src(w0) <= trunc - 1``, in a fixed order.

    These express ``u`` as a restriction of a generic cell ``(w0, v_last)``.
    """
    cache = getattr(site, "_widen_fact", None)
    if cache is None:
        cache = site._widen_fact = {}
    if trunc not in cache:
        out: dict[int, list[tuple[int, int]]] = {}
        for w0 in range(len(site.src)):
            m0 = site.src[w0]
            if m0 > trunc - 1 or site.tgt[w0] + 1 > site.dim:
                continue
            W = site.widen(w0)
            for rho in site.into[m0 + 1][: site.n_into(m0 + 1, trunc)]:
                out.setdefault(site.compose(W, rho), []).append((w0, rho))
        for lst in out.values():
            lst.sort(key=lambda p: (site.src[p[0]], p[0], p[1]))
        cache[trunc] = out
    return cache[trunc]
