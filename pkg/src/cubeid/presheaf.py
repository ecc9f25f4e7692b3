"""Finite truncated presheaves on the cube site, their maps, limits and colimits.

A :class:`CubicalSet` stores, for every level ``n <= trunc``, a list of cell
names and an integer table ``R[n]`` of shape ``(cells_n, arrows into n)``:
``R[n][x, col(f)]`` is the restriction of cell ``x`` along the arrow ``f``.
Maps store one integer array per level.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from . import kernels
from .site import Site, SiteError


class PresheafError(ValueError):
    pass


class BudgetError(PresheafError):
    """An operation would need cube levels beyond the available budget."""


class CubicalSet:
    def __init__(
        self,
        site: Site,
        trunc: int,
        keys: Sequence[Sequence[Hashable]],
        restrict: Sequence[np.ndarray],
        names: Sequence[Sequence[str]] | None = None,
        label: str = "",
        check: bool = True,
    ):
        if trunc > site.dim:
            raise BudgetError(f"budget {trunc} exceeds site dimension {site.dim}")
        if len(keys) != trunc + 1 or len(restrict) != trunc + 1:
            raise PresheafError("one cell list and one table per level are required")
        self.site = site
        self.trunc = trunc
        self.keys = [list(k) for k in keys]
        self.R = [np.asarray(r, dtype=np.int64).reshape(len(self.keys[n]), site.n_into(n, trunc))
                  for n, r in enumerate(restrict)]
        self._names = [list(n) for n in names] if names is not None else None
        self.label = label
        self._index: list[dict] | None = None
        self._support: list[np.ndarray] | None = None
        if check:
            self.check()

    def __repr__(self):
        return f"CubicalSet({self.label or '?'}, sizes={self.sizes()})"

    # --- basic access ---------------------------------------------------
    @property
    def mode(self):
        return self.site.mode

    def size(self, n: int) -> int:
        return len(self.keys[n])

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(k) for k in self.keys)

    def name(self, n: int, i: int) -> str:
        if self._names is not None:
            return self._names[n][i]
        return str(self.keys[n][i])

    def names(self, n: int) -> list[str]:
        return [self.name(n, i) for i in range(self.size(n))]

    def index(self, n: int, key: Hashable) -> int:
        if self._index is None:
            self._index = [{k: i for i, k in enumerate(ks)} for ks in self.keys]
        return self._index[n][key]

    def find(self, n: int, key: Hashable) -> int | None:
        if self._index is None:
            self._index = [{k: i for i, k in enumerate(ks)} for ks in self.keys]
        return self._index[n].get(key)

    def by_name(self, n: int, name: str) -> int:
        names = self.names(n)
        try:
            return names.index(name)
        except ValueError:
            raise PresheafError(f"no cell {name!r} at level {n} of {self!r}") from None

    def restrict(self, mid: int, x: int) -> int:
        return int(self.R[self.site.tgt[mid]][x, self.site.col[mid]])

    def columns(self, n: int) -> list[int]:
        return self.site.into[n][: self.site.n_into(n, self.trunc)]

    # --- validation -------------------------------------------------------
    def check(self) -> None:
        site = self.site
        for n in range(self.trunc + 1):
            cols = self.columns(n)
            if self.R[n].size:
                srcs = site.src_arr[cols]
                limits = np.asarray([self.size(m) for m in range(self.trunc + 1)])[srcs]
                if np.any(self.R[n] < 0) or np.any(self.R[n] >= limits[None, :]):
                    raise PresheafError(f"restriction target out of range at level {n}")
            ident = site.col[site.identity(n)]
            if not np.array_equal(self.R[n][:, ident], np.arange(self.size(n))):
                raise PresheafError(f"restriction along the identity is not trivial at level {n}")
        bad = self.functoriality_violations()
        if bad:
            raise PresheafError(f"{bad} functoriality violations in {self!r}")

    def functoriality_violations(self) -> int:
        bad = 0
        for n in range(self.trunc + 1):
            g, f, gf, ms = self.site.composition_table(n, self.trunc)
            for m in range(self.trunc + 1):
                sel = np.nonzero(ms == m)[0]
                bad += kernels.functoriality_violations(self.R[n], self.R[m], g, f, gf, sel)
        return bad

    def composable_pairs(self) -> int:
        return sum(self.size(n) * len(self.site.composition_table(n, self.trunc)[0])
                   for n in range(self.trunc + 1))

    # --- derived data ----------------------------------------------------
    def support(self, n: int, x: int) -> frozenset[int]:
        """Variables a cell depends on (affine mode only)."""
        if self.mode.kind.value != "affine":
            raise PresheafError("support is only defined in affine mode")
        mask = int(self.support_masks(n)[x])
        return frozenset(i for i in range(1, n + 1) if mask >> (i - 1) & 1)

    def support_masks(self, n: int) -> np.ndarray:
        if self._support is None:
            self._support = [None] * (self.trunc + 1)
        if self._support[n] is None:
            mask = np.zeros(self.size(n), dtype=np.int64)
            ar = np.arange(self.size(n))
            for i in range(1, n + 1):
                c = self.site.col[self.site.zero_at(n, i)]
                mask |= (self.R[n][:, c] != ar).astype(np.int64) << (i - 1)
            self._support[n] = mask
        return self._support[n]

    def truncate(self, d: int) -> "CubicalSet":
        if d > self.trunc:
            raise BudgetError(f"cannot raise budget {self.trunc} to {d}")
        if d == self.trunc:
            return self
        ncol = [self.site.n_into(n, d) for n in range(d + 1)]
        return CubicalSet(
            self.site, d, self.keys[: d + 1], [self.R[n][:, : ncol[n]] for n in range(d + 1)],
            names=None if self._names is None else self._names[: d + 1],
            label=self.label, check=False,
        )

    def total_cells(self) -> int:
        return sum(self.sizes())


class PresheafMap:
    def __init__(self, dom: CubicalSet, cod: CubicalSet, comp: Sequence[np.ndarray],
                 label: str = "", check: bool = True):
        if dom.site is not cod.site:
            raise PresheafError("maps must stay within one site")
        if dom.trunc != cod.trunc:
            raise BudgetError(f"budget mismatch {dom.trunc} vs {cod.trunc}")
        self.dom, self.cod = dom, cod
        self.comp = [np.asarray(c, dtype=np.int64).reshape(dom.size(n)) for n, c in enumerate(comp)]
        self.label = label
        if len(self.comp) != dom.trunc + 1:
            raise PresheafError("one component per level is required")
        if check:
            self.check()

    def __repr__(self):
        return f"PresheafMap({self.label or '?'}: {self.dom.label} -> {self.cod.label})"

    @property
    def trunc(self) -> int:
        return self.dom.trunc

    @property
    def site(self) -> Site:
        return self.dom.site

    def __call__(self, n: int, x: int) -> int:
        return int(self.comp[n][x])

    def check(self) -> None:
        for n in range(self.trunc + 1):
            c = self.comp[n]
            if c.size and (c.min() < 0 or c.max() >= self.cod.size(n)):
                raise PresheafError(f"{self!r}: component out of range at level {n}")
        bad = self.naturality_violations()
        if bad:
            raise PresheafError(f"{self!r}: {bad} naturality violations")

    def naturality_violations(self) -> int:
        sizes = [self.dom.size(n) for n in range(self.trunc + 1)]
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        comp_all = np.concatenate(self.comp) if sum(sizes) else np.zeros(0, dtype=np.int64)
        bad = 0
        for n in range(self.trunc + 1):
            cols = self.dom.columns(n)
            col_off = offsets[self.site.src_arr[cols]] if cols else np.zeros(0, dtype=np.int64)
            bad += kernels.naturality_violations(self.comp[n], comp_all, col_off, self.dom.R[n], self.cod.R[n])
        return bad

    def __eq__(self, other):
        if not isinstance(other, PresheafMap):
            return NotImplemented
        return (self.dom is other.dom and self.cod is other.cod
                and all(np.array_equal(a, b) for a, b in zip(self.comp, other.comp)))

    __hash__ = None

    def equals(self, other: "PresheafMap") -> bool:
        """Cellwise equality (domains/codomains compared by identity of data)."""
        return (self.trunc == other.trunc
                and all(np.array_equal(a, b) for a, b in zip(self.comp, other.comp)))

    def then(self, other: "PresheafMap") -> "PresheafMap":
        """``other . self``."""
        if self.cod is not other.dom:
            if self.cod.sizes() != other.dom.sizes():
                raise PresheafError(f"cannot compose {self!r} with {other!r}")
        return PresheafMap(self.dom, other.cod, [other.comp[n][self.comp[n]] for n in range(self.trunc + 1)],
                           label=f"{other.label}.{self.label}", check=False)

    def truncate(self, d: int) -> "PresheafMap":
        if d == self.trunc:
            return self
        return PresheafMap(self.dom.truncate(d), self.cod.truncate(d), self.comp[: d + 1],
                           label=self.label, check=False)

    def is_mono(self) -> bool:
        return all(np.unique(c).size == c.size for c in self.comp)

    def is_epi(self) -> bool:
        return all(np.unique(c).size == self.cod.size(n) for n, c in enumerate(self.comp))

    def is_iso(self) -> bool:
        return self.is_mono() and self.is_epi()

    def inverse(self) -> "PresheafMap":
        if not self.is_iso():
            raise PresheafError(f"{self!r} is not invertible")
        inv = []
        for c in self.comp:
            a = np.empty_like(c)
            a[c] = np.arange(c.size)
            inv.append(a)
        return PresheafMap(self.cod, self.dom, inv, label=f"{self.label}^-1", check=False)

    def image(self) -> "Subpresheaf":
        member = []
        for n, c in enumerate(self.comp):
            m = np.zeros(self.cod.size(n), dtype=bool)
            m[c] = True
            member.append(m)
        return Subpresheaf(self.cod, member, check=False)

    def fiber_index(self, n: int) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for x, y in enumerate(self.comp[n].tolist()):
            out.setdefault(y, []).append(x)
        return out


def identity(X: CubicalSet) -> PresheafMap:
    return PresheafMap(X, X, [np.arange(X.size(n)) for n in range(X.trunc + 1)], label=f"id_{X.label}", check=False)


def map_from_function(dom: CubicalSet, cod: CubicalSet, fn: Callable[[int, int], int], label: str = "",
                      check: bool = True) -> PresheafMap:
    comp = [np.fromiter((fn(n, x) for x in range(dom.size(n))), dtype=np.int64, count=dom.size(n))
            for n in range(dom.trunc + 1)]
    return PresheafMap(dom, cod, comp, label=label, check=check)


@dataclass
class Subpresheaf:
    of: CubicalSet
    member: list
    check: bool = True

    def __post_init__(self):
        self.member = [np.asarray(m, dtype=bool) for m in self.member]
        if self.check and not self.is_closed():
            raise PresheafError("subset is not closed under restriction")

    def is_closed(self) -> bool:
        X = self.of
        for n in range(X.trunc + 1):
            rows = np.nonzero(self.member[n])[0]
            if rows.size == 0:
                continue
            for j, mid in enumerate(X.columns(n)):
                m = X.site.src[mid]
                if not np.all(self.member[m][X.R[n][rows, j]]):
                    return False
        return True

    def counts(self) -> tuple[int, ...]:
        return tuple(int(m.sum()) for m in self.member)

    def contains(self, n: int, x: int) -> bool:
        return bool(self.member[n][x])

    def to_object(self, label: str = "") -> tuple[CubicalSet, PresheafMap]:
        X = self.of
        idx = [np.nonzero(m)[0] for m in self.member]
        back = []
        for n in range(X.trunc + 1):
            b = np.full(X.size(n), -1, dtype=np.int64)
            b[idx[n]] = np.arange(idx[n].size)
            back.append(b)
        keys, tabs = [], []
        for n in range(X.trunc + 1):
            keys.append([X.keys[n][i] for i in idx[n]])
            cols = X.columns(n)
            t = X.R[n][idx[n]]
            if t.size:
                srcs = X.site.src_arr[cols]
                out = np.empty_like(t)
                for m in range(X.trunc + 1):
                    sel = srcs == m
                    out[:, sel] = back[m][t[:, sel]]
                t = out
            tabs.append(t)
        names = [[X.name(n, i) for i in idx[n]] for n in range(X.trunc + 1)]
        S = CubicalSet(X.site, X.trunc, keys, tabs, names=names, label=label or f"sub({X.label})", check=False)
        return S, PresheafMap(S, X, idx, label=f"incl_{S.label}", check=False)

    def union(self, other: "Subpresheaf") -> "Subpresheaf":
        return Subpresheaf(self.of, [a | b for a, b in zip(self.member, other.member)], check=False)

    def pullback(self, f: PresheafMap) -> "Subpresheaf":
        return Subpresheaf(f.dom, [self.member[n][f.comp[n]] for n in range(f.trunc + 1)], check=False)


# ------------------------------------------------------------------ builders

def yoneda(site: Site, n: int, trunc: int | None = None) -> CubicalSet:
    """The representable cube of dimension ``n``; cells at level m are arrows m -> n."""
    trunc = site.dim if trunc is None else trunc
    if n > trunc:
        raise BudgetError(f"yoneda({n}) needs budget >= {n}, have {trunc}")
    keys = [list(site.hom[(m, n)]) for m in range(trunc + 1)]
    pos = [{mid: i for i, mid in enumerate(k)} for k in keys]
    tabs = []
    for m in range(trunc + 1):
        cols = site.into[m][: site.n_into(m, trunc)]
        t = np.empty((len(keys[m]), len(cols)), dtype=np.int64)
        for i, cell in enumerate(keys[m]):
            for j, f in enumerate(cols):
                t[i, j] = pos[site.src[f]][site.compose(cell, f)]
        tabs.append(t)
    names = [[site.name(mid) for mid in k] for k in keys]
    return CubicalSet(site, trunc, keys, tabs, names=names, label=f"y{n}", check=False)


def empty(site: Site, trunc: int) -> CubicalSet:
    return CubicalSet(site, trunc, [[] for _ in range(trunc + 1)],
                      [np.zeros((0, site.n_into(n, trunc)), dtype=np.int64) for n in range(trunc + 1)],
                      label="0", check=False)


def terminal(site: Site, trunc: int) -> CubicalSet:
    T = yoneda(site, 0, trunc)
    T.label = "1"
    return T


def discrete(site: Site, trunc: int, k: int, label: str = "") -> CubicalSet:
    """Constant presheaf on ``k`` points."""
    keys = [[f"p{i}" for i in range(k)] for _ in range(trunc + 1)]
    tabs = []
    for n in range(trunc + 1):
        tabs.append(np.repeat(np.arange(k)[:, None], site.n_into(n, trunc), axis=1))
    return CubicalSet(site, trunc, keys, tabs, label=label or f"{k}", check=False)


def from_table(site: Site, trunc: int, cells: Sequence[Sequence[str]],
               restrict: dict[tuple[str, str], str], label: str = "") -> CubicalSet:
    """Explicit presheaf: ``restrict[(cell, arrow)]`` names the restricted cell.

    Restrictions along identities may be omitted; all others are required.
    """
    pos = [{c: i for i, c in enumerate(cs)} for cs in cells]
    tabs = []
    for n in range(trunc + 1):
        cols = site.into[n][: site.n_into(n, trunc)]
        t = np.empty((len(cells[n]), len(cols)), dtype=np.int64)
        ident = site.identity(n)
        for i, c in enumerate(cells[n]):
            for j, f in enumerate(cols):
                if f == ident:
                    t[i, j] = i
                    continue
                key = (c, site.name(f))
                if key not in restrict:
                    raise PresheafError(f"missing restriction of {c!r} along {site.name(f)}")
                try:
                    t[i, j] = pos[site.src[f]][restrict[key]]
                except KeyError:
                    raise PresheafError(f"unknown cell {restrict[key]!r} at level {site.src[f]}") from None
        tabs.append(t)
    return CubicalSet(site, trunc, [list(c) for c in cells], tabs, label=label)


def terminal_map(X: CubicalSet, one: CubicalSet | None = None) -> PresheafMap:
    one = one or terminal(X.site, X.trunc)
    return PresheafMap(X, one, [np.zeros(X.size(n), dtype=np.int64) for n in range(X.trunc + 1)],
                       label=f"!_{X.label}", check=False)


def empty_map(X: CubicalSet) -> PresheafMap:
    E = empty(X.site, X.trunc)
    return PresheafMap(E, X, [np.zeros(0, dtype=np.int64) for _ in range(X.trunc + 1)],
                       label=f"0->{X.label}", check=False)


def boundary(site: Site, n: int, trunc: int | None = None) -> Subpresheaf:
    """Cells of y(n) with at least one constant coordinate."""
    from .site import is_constant

    Y = yoneda(site, n, trunc)
    member = [np.asarray([any(is_constant(t) for t in site.coords[mid]) for mid in Y.keys[m]], dtype=bool)
              for m in range(Y.trunc + 1)]
    return Subpresheaf(Y, member, check=False)


def induced_map(site: Site, mid: int, trunc: int, dom: CubicalSet | None = None,
                cod: CubicalSet | None = None) -> PresheafMap:
    """yoneda(src) -> yoneda(tgt) given by postcomposition with ``mid``."""
    dom = dom or yoneda(site, site.src[mid], trunc)
    cod = cod or yoneda(site, site.tgt[mid], trunc)
    comp = [np.asarray([cod.index(m, site.compose(mid, cell)) for cell in dom.keys[m]], dtype=np.int64)
            for m in range(trunc + 1)]
    return PresheafMap(dom, cod, comp, label=site.name(mid), check=False)


# ------------------------------------------------------------------ limits

def _pair_table(X: CubicalSet, ia: list[np.ndarray], ib: list[np.ndarray], A: CubicalSet, B: CubicalSet):
    """Restriction tables for a set of pairs closed under componentwise restriction."""
    site = A.site
    trunc = min(A.trunc, B.trunc)
    codes = []
    for m in range(trunc + 1):
        c = ia[m] * max(B.size(m), 1) + ib[m]
        order = np.argsort(c, kind="stable")
        codes.append((c[order], order))
    tabs = []
    for n in range(trunc + 1):
        cols = site.into[n][: site.n_into(n, trunc)]
        ra = A.R[n][ia[n]][:, : len(cols)]
        rb = B.R[n][ib[n]][:, : len(cols)]
        out = np.empty((ia[n].size, len(cols)), dtype=np.int64)
        srcs = site.src_arr[cols] if cols else np.zeros(0, dtype=np.int64)
        for m in range(trunc + 1):
            sel = np.nonzero(srcs == m)[0]
            if sel.size == 0 or ia[n].size == 0:
                continue
            code = ra[:, sel] * max(B.size(m), 1) + rb[:, sel]
            sc, order = codes[m]
            pos = np.searchsorted(sc, code)
            if np.any(pos >= sc.size) or np.any(sc[np.minimum(pos, sc.size - 1)] != code):
                raise PresheafError("pairs are not closed under restriction")
            out[:, sel] = order[pos]
        tabs.append(out)
    return tabs


def pullback(f: PresheafMap, g: PresheafMap, label: str = "") -> tuple[CubicalSet, PresheafMap, PresheafMap]:
    """Levelwise pairs (a, b) with f(a) = g(b), with the two projections."""
    if f.cod is not g.cod and f.cod.sizes() != g.cod.sizes():
        raise PresheafError("pullback needs a common codomain")
    trunc = min(f.trunc, g.trunc)
    f, g = f.truncate(trunc), g.truncate(trunc)
    A, B = f.dom, g.dom
    ia, ib = [], []
    for n in range(trunc + 1):
        i, j = kernels.join_codes(f.comp[n], g.comp[n])
        ia.append(np.asarray(i, dtype=np.int64))
        ib.append(np.asarray(j, dtype=np.int64))
    tabs = _pair_table(None, ia, ib, A, B)
    keys = [list(zip(ia[n].tolist(), ib[n].tolist())) for n in range(trunc + 1)]
    names = [[f"({A.name(n, a)},{B.name(n, b)})" for a, b in keys[n]] for n in range(trunc + 1)]
    P = CubicalSet(A.site, trunc, keys, tabs, names=names, label=label or f"{A.label}x{B.label}", check=False)
    p1 = PresheafMap(P, A, ia, label="pr1", check=False)
    p2 = PresheafMap(P, B, ib, label="pr2", check=False)
    return P, p1, p2


def product(A: CubicalSet, B: CubicalSet, label: str = "") -> tuple[CubicalSet, PresheafMap, PresheafMap]:
    one = terminal(A.site, min(A.trunc, B.trunc))
    return pullback(terminal_map(A.truncate(one.trunc), one), terminal_map(B.truncate(one.trunc), one),
                    label=label or f"{A.label}x{B.label}")


def pairing(P: CubicalSet, f: PresheafMap, g: PresheafMap, label: str = "") -> PresheafMap:
    """Mediating map into a pullback/product built by :func:`pullback`."""
    comp = [np.asarray([P.index(n, (int(a), int(b))) for a, b in zip(f.comp[n], g.comp[n])], dtype=np.int64)
            for n in range(P.trunc + 1)]
    return PresheafMap(f.dom, P, comp, label=label or f"<{f.label},{g.label}>")


def pushout(f: PresheafMap, g: PresheafMap, label: str = "") -> tuple[CubicalSet, PresheafMap, PresheafMap]:
    """B +_A C for f: A -> B, g: A -> C, via union-find per level."""
    if f.dom is not g.dom and f.dom.sizes() != g.dom.sizes():
        raise PresheafError("pushout needs a common domain")
    B, C = f.cod, g.cod
    trunc = min(B.trunc, C.trunc)
    cls, reps, keys, names = [], [], [], []
    for n in range(trunc + 1):
        nb = B.size(n)
        parent = kernels.union_find(nb + C.size(n), f.comp[n].astype(np.int64), g.comp[n].astype(np.int64) + nb)
        roots, inv = np.unique(parent, return_inverse=True)
        cls.append(inv.astype(np.int64))
        reps.append(roots)
        keys.append([("L", int(r)) if r < nb else ("R", int(r - nb)) for r in roots])
        names.append([B.name(n, r) if r < nb else C.name(n, r - nb) for r in roots])
    tabs = []
    for n in range(trunc + 1):
        cols = B.site.into[n][: B.site.n_into(n, trunc)]
        nb = B.size(n)
        t = np.empty((len(reps[n]), len(cols)), dtype=np.int64)
        for k, r in enumerate(reps[n]):
            for j, mid in enumerate(cols):
                m = B.site.src[mid]
                if r < nb:
                    t[k, j] = cls[m][B.R[n][r, j]]
                else:
                    t[k, j] = cls[m][B.size(m) + C.R[n][r - nb, j]]
        tabs.append(t)
    Q = CubicalSet(B.site, trunc, keys, tabs, names=names, label=label or f"{B.label}+{C.label}")
    inl = PresheafMap(B.truncate(trunc), Q, [cls[n][: B.size(n)] for n in range(trunc + 1)], label="inl")
    inr = PresheafMap(C.truncate(trunc), Q, [cls[n][B.size(n):] for n in range(trunc + 1)], label="inr")
    return Q, inl, inr


def coproduct(B: CubicalSet, C: CubicalSet, label: str = "") -> tuple[CubicalSet, PresheafMap, PresheafMap]:
    trunc = min(B.trunc, C.trunc)
    E = empty(B.site, trunc)
    f = PresheafMap(E, B.truncate(trunc), [np.zeros(0, dtype=np.int64)] * (trunc + 1), check=False)
    g = PresheafMap(E, C.truncate(trunc), [np.zeros(0, dtype=np.int64)] * (trunc + 1), check=False)
    return pushout(f, g, label=label or f"{B.label}+{C.label}")


def copair(Q: CubicalSet, inl: PresheafMap, inr: PresheafMap, u: PresheafMap, v: PresheafMap,
           label: str = "") -> PresheafMap:
    """The map out of a pushout agreeing with ``u`` and ``v`` on the two legs."""
    comp = []
    for n in range(Q.trunc + 1):
        c = np.full(Q.size(n), -1, dtype=np.int64)
        c[inl.comp[n]] = u.comp[n]
        clash = c[inr.comp[n]]
        if np.any((clash >= 0) & (clash != v.comp[n])):
            raise PresheafError("cocone legs disagree on the glued part")
        c[inr.comp[n]] = v.comp[n]
        comp.append(c)
    return PresheafMap(Q, u.cod, comp, label=label or f"[{u.label},{v.label}]")


# ------------------------------------------------------------- universal checks

@dataclass
class SquareCheck:
    ok: bool
    cones: int
    failures: int


def check_pullback_square(top: PresheafMap, left: PresheafMap, right: PresheafMap, bottom: PresheafMap) -> SquareCheck:
    """Is A -top-> B, A -left-> C, B -right-> D, C -bottom-> D a pullback?

    Every cone from a representable y(n) is a pair (b, c) of level-n cells
    with equal images in D; the square is a pullback iff each such cone has
    exactly one mediating cell of A.
    """
    trunc = min(top.trunc, left.trunc, right.trunc, bottom.trunc)
    cones = failures = 0
    for n in range(trunc + 1):
        if not np.array_equal(right.comp[n][top.comp[n]], bottom.comp[n][left.comp[n]]):
            failures += 1
        ib, ic = kernels.join_codes(right.comp[n], bottom.comp[n])
        nc = max(left.cod.size(n), 1)
        cone_codes = np.asarray(ib, dtype=np.int64) * nc + np.asarray(ic, dtype=np.int64)
        a_codes = top.comp[n] * nc + left.comp[n]
        cones += cone_codes.size
        uniq, counts = np.unique(a_codes, return_counts=True)
        failures += int(np.count_nonzero(counts > 1))
        hit = np.isin(cone_codes, uniq)
        failures += int(np.count_nonzero(~hit))
    return SquareCheck(failures == 0, cones, failures)


def commutes(*paths: tuple[PresheafMap, ...]) -> bool:
    """All composites (listed first-to-last) agree cellwise."""
    def run(path):
        comp = [np.arange(path[0].dom.size(n)) for n in range(path[0].trunc + 1)]
        for m in path:
            comp = [m.comp[n][comp[n]] for n in range(len(comp))]
        return comp
    ref = run(paths[0])
    return all(all(np.array_equal(a, b) for a, b in zip(ref, run(p))) for p in paths[1:])


def find_iso(X: CubicalSet, Y: CubicalSet) -> PresheafMap | None:
    """Search for a levelwise bijection commuting with all restrictions.

    Cells are assigned from the top level down; each assignment forces the
    images of all restrictions, and unforced cells are tried in order.
    """
    if X.site is not Y.site or X.trunc != Y.trunc or X.sizes() != Y.sizes():
        return None
    trunc = X.trunc

    def signature(Z, n, x):
        # distinct restrictions per source level; invariant under isomorphism
        row = Z.R[n][x]
        srcs = Z.site.src_arr[Z.columns(n)]
        return tuple(np.unique(row[srcs == m]).size for m in range(n + 1))

    sig_x = [[signature(X, n, x) for x in range(X.size(n))] for n in range(trunc + 1)]
    sig_y = [[signature(Y, n, y) for y in range(Y.size(n))] for n in range(trunc + 1)]
    order = [(n, x) for n in range(trunc, -1, -1) for x in range(X.size(n))]
    fwd = [np.full(X.size(n), -1, dtype=np.int64) for n in range(trunc + 1)]
    used = [np.zeros(Y.size(n), dtype=bool) for n in range(trunc + 1)]

    def assign(n, x, y, trail):
        stack = [(n, x, y)]
        while stack:
            n, x, y = stack.pop()
            if fwd[n][x] >= 0:
                if fwd[n][x] != y:
                    return False
                continue
            if used[n][y] or sig_x[n][x] != sig_y[n][y]:
                return False
            fwd[n][x] = y
            used[n][y] = True
            trail.append((n, x, y))
            for j, mid in enumerate(X.columns(n)):
                m = X.site.src[mid]
                stack.append((m, int(X.R[n][x, j]), int(Y.R[n][y, j])))
        return True

    def undo(trail):
        for n, x, y in trail:
            fwd[n][x] = -1
            used[n][y] = False

    def search(k):
        while k < len(order) and fwd[order[k][0]][order[k][1]] >= 0:
            k += 1
        if k == len(order):
            return True
        n, x = order[k]
        for y in range(Y.size(n)):
            if used[n][y]:
                continue
            trail: list = []
            if assign(n, x, y, trail) and search(k + 1):
                return True
            undo(trail)
        return False

    if not search(0):
        return None
    m = PresheafMap(X, Y, fwd, label="iso", check=True)
    return m if m.is_iso() else None


def generated(X: CubicalSet, gens: Sequence[tuple[int, int]]) -> Subpresheaf:
    """Smallest subpresheaf containing the given (level, cell) pairs."""
    member = [np.zeros(X.size(n), dtype=bool) for n in range(X.trunc + 1)]
    for n, x in gens:
        row = X.R[n][x]
        srcs = X.site.src_arr[X.columns(n)]
        for m in range(X.trunc + 1):
            member[m][row[srcs == m]] = True
    return Subpresheaf(X, member, check=False)


def enumerate_homs(X: CubicalSet, Y: CubicalSet, limit: int = 100_000, strict: bool = True,
                   allowed: list[np.ndarray] | None = None) -> list[PresheafMap]:
    """All maps X -> Y.

    Past ``limit`` maps this raises, or with ``strict=False`` returns the
    first ``limit`` found.  ``allowed[n]`` (cells of X by cells of Y) further
    restricts the admissible images.

    Levels are filled bottom-up.  Once the lower levels are fixed, the
    admissible images of every cell at level ``n`` are computed at once;
    arrows between cells of the same level are propagated while branching.
    """
    if X.trunc != Y.trunc:
        raise BudgetError("hom enumeration needs equal budgets")
    trunc = X.trunc
    site = X.site
    val = [np.full(X.size(n), -1, dtype=np.int64) for n in range(trunc + 1)]
    lower, same = [], []
    for n in range(trunc + 1):
        srcs = site.src_arr[X.columns(n)]
        lower.append([(m, np.nonzero(srcs == m)[0]) for m in range(n)])
        same.append(np.nonzero(srcs == n)[0])
    out: list[PresheafMap] = []

    class _Enough(Exception):
        pass

    def admissible(n):
        ok = np.ones((X.size(n), Y.size(n)), dtype=bool) if allowed is None else allowed[n].copy()
        for m, js in lower[n]:
            want = val[m][X.R[n][:, js]]
            ok &= np.all(Y.R[n][None, :, js] == want[:, None, :], axis=2)
        return ok

    def level(n):
        if n > trunc:
            if len(out) >= limit:
                if not strict:
                    raise _Enough
                raise PresheafError(f"more than {limit} maps {X.label} -> {Y.label}")
            out.append(PresheafMap(X, Y, [v.copy() for v in val], check=False))
            return
        ok = admissible(n)
        if X.size(n) and not ok.any(axis=1).all():
            return
        RX, RY, cols, v = X.R[n], Y.R[n], same[n], val[n]

        def assign(x, y, trail):
            stack = [(x, y)]
            while stack:
                x, y = stack.pop()
                if v[x] >= 0:
                    if v[x] != y:
                        return False
                    continue
                if not ok[x, y]:
                    return False
                v[x] = y
                trail.append(x)
                stack.extend(zip(RX[x, cols].tolist(), RY[y, cols].tolist()))
            return True

        def cell(x):
            while x < X.size(n) and v[x] >= 0:
                x += 1
            if x == X.size(n):
                level(n + 1)
                return
            for y in np.nonzero(ok[x])[0].tolist():
                trail: list = []
                if assign(x, y, trail):
                    cell(x + 1)
                v[trail] = -1

        cell(0)

    try:
        level(0)
    except _Enough:
        pass
    return out
