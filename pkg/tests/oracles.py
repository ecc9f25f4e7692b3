"""Brute-force reference computations, written without the package.

Cube maps ``m -> n`` are ``n``-tuples over ``{0, 1, x1..xm}`` (affine:
variables pairwise distinct).  Sieves are found by testing every subset
of arrows for closure, and natural families on a sieve into a discrete
presheaf are counted through connected components.
"""
from __future__ import annotations

from itertools import chain, combinations, product

ZERO, ONE = "0", "1"


def cube_maps(m: int, n: int, affine: bool = True) -> list[tuple]:
    letters = [ZERO, ONE] + [f"x{i}" for i in range(1, m + 1)]
    out = []
    for coords in product(letters, repeat=n):
        vs = [c for c in coords if c.startswith("x")]
        if affine and len(vs) != len(set(vs)):
            continue
        out.append(coords)
    return out


def compose(first: tuple, then: tuple) -> tuple:
    """``then . first``: substitute ``first``'s coordinates into ``then``'s."""
    return tuple(c if c in (ZERO, ONE) else first[int(c[1:]) - 1] for c in then)


def arrows_into(n: int, trunc: int, affine: bool = True) -> list[tuple[int, tuple]]:
    return [(m, f) for m in range(trunc + 1) for f in cube_maps(m, n, affine)]


def is_sieve(S: set, trunc: int, affine: bool = True) -> bool:
    for m, f in S:
        for m2 in range(trunc + 1):
            for h in cube_maps(m2, m, affine):
                if (m2, compose(h, f)) not in S:
                    return False
    return True


def sieves(n: int, trunc: int, affine: bool = True) -> list[frozenset]:
    """Every subset of arrows into ``y(n)`` closed under precomposition."""
    arrows = arrows_into(n, trunc, affine)
    if len(arrows) > 20:
        raise ValueError("too many arrows for subset enumeration")
    subsets = chain.from_iterable(combinations(arrows, r) for r in range(len(arrows) + 1))
    return [frozenset(s) for s in subsets if is_sieve(set(s), trunc, affine)]


def components(S: frozenset, trunc: int, affine: bool = True) -> int:
    """Connected components of the category of elements of ``S``."""
    parent = {a: a for a in S}

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for m, f in S:
        for m2 in range(trunc + 1):
            for h in cube_maps(m2, m, affine):
                a, b = find((m, f)), find((m2, compose(h, f)))
                if a != b:
                    parent[a] = b
    return len({find(a) for a in S})


def partial_lift_count(n: int, trunc: int, points: int = 1, affine: bool = True) -> int:
    """Cells at level ``n`` of the partial-lift object of ``k points -> 1``."""
    return sum(points ** components(S, trunc, affine) for S in sieves(n, trunc, affine))
