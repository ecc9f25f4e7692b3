"""Brute-force oracles, run before anything is constructed.

Hand counts: a point carries the empty and the total sieve; an edge
carries the empty sieve, either end, both ends, or the total sieve.  A
family over ``k`` points picks one point per connected component.
"""
import pytest

import oracles

FROZEN = {
    # (level, trunc, points, affine): count
    (0, 1, 1, True): 2,
    (1, 1, 1, True): 5,
    (0, 1, 2, True): 3,
    (1, 1, 2, True): 1 + 2 + 2 + 4 + 2,
    (1, 2, 1, True): 5,
    (1, 1, 1, False): 5,
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_partial_lift_counts(key):
    level, trunc, points, affine = key
    assert oracles.partial_lift_count(level, trunc, points, affine) == FROZEN[key]


def test_sieve_counts():
    # sieves on y(1): empty, {end 0}, {end 1}, both ends, all
    assert len(oracles.sieves(1, 1)) == 5
    assert len(oracles.sieves(0, 2)) == 2


def test_oracle_refuses_large_enumerations():
    with pytest.raises(ValueError):
        oracles.sieves(2, 2)
