"""Minimal sets, traces, and local group structure on the fixtures."""

from __future__ import annotations

import pytest

from nudfa.algebra import UnaryClone
from nudfa.congruence import all_congruences
from nudfa.fixtures import get_fixture
from nudfa.limits import default_budget
from nudfa.localize import (
    atom_blocks_simple,
    block_group,
    minimal_set_through,
    minimal_sets,
    traces,
)
from nudfa.partitions import Partition

ETA = Partition.from_blocks(6, [{0, 2, 4}, {1, 3, 5}])


@pytest.fixture(scope="module")
def marked():
    fx = get_fixture("Z6%2")
    clone = UnaryClone(fx.algebra, default_budget())
    return fx, clone, all_congruences(fx.algebra)


def test_minimal_sets_of_the_characteristic_three_cover(marked):
    fx, clone, lat = marked
    sets = minimal_sets(fx.algebra, clone, lat.zero, ETA)
    assert [sorted(s.universe) for s in sets] == [[0, 2, 4], [1, 3, 5]]
    for ms in sets:
        assert ms.witness.image == ms.universe
        assert ms.idempotent is not None
        assert ms.idempotent.is_idempotent()
        assert ms.idempotent.image == ms.universe


def test_minimal_sets_of_the_characteristic_two_cover(marked):
    fx, clone, lat = marked
    sets = minimal_sets(fx.algebra, clone, ETA, lat.one)
    # every two-element polynomial image crossing the parity classes
    assert [sorted(s.universe) for s in sets] == [
        [0, 1], [0, 3], [0, 5], [1, 2], [1, 4],
        [2, 3], [2, 5], [3, 4], [4, 5],
    ]
    assert all(len(s.universe) == 2 for s in sets)


def test_traces_are_the_blocks_that_actually_split(marked):
    fx, clone, lat = marked
    lower = minimal_sets(fx.algebra, clone, lat.zero, ETA)[0]
    assert [sorted(t) for t in traces(fx.algebra, lower.universe, lat.zero, ETA)] == [
        [0, 2, 4]
    ]
    upper = minimal_sets(fx.algebra, clone, ETA, lat.one)[0]
    assert [sorted(t) for t in traces(fx.algebra, upper.universe, ETA, lat.one)] == [
        [0, 1]
    ]


def test_minimal_set_through_a_requested_element(marked):
    fx, clone, lat = marked
    all_ranges = {
        s.universe for s in minimal_sets(fx.algebra, clone, ETA, lat.one)
    }
    for e in range(6):
        ms = minimal_set_through(fx.algebra, clone, lat, ETA, lat.one, e)
        assert ms is not None
        assert e in ms.universe
        assert ms.universe in all_ranges


def test_block_group_is_an_elementary_abelian_three_group(marked):
    fx, _, _ = marked
    add, p = block_group(fx.algebra, fx.malcev, ETA, 0)
    assert p == 3
    assert add[(2, 4)] == 0 and add[(4, 4)] == 2
    add1, p1 = block_group(fx.algebra, fx.malcev, ETA, 1)
    assert p1 == 3
    assert add1[(3, 5)] == 1 and add1[(3, 3)] == 5


def test_block_group_rejects_a_non_prime_block(marked):
    fx, _, lat = marked
    with pytest.raises(ValueError):
        block_group(fx.algebra, fx.malcev, lat.one, 0)


def test_atom_blocks_are_polynomially_simple(marked):
    fx, clone, _ = marked
    assert atom_blocks_simple(fx.algebra, clone, ETA)
