"""Operation tables, unary clone generation, difference-polynomial search."""

import pytest

from nudfa.algebra import (
    FiniteAlgebra,
    UnaryClone,
    find_malcev_polynomial,
    make_op,
    quotient_algebra,
    verify_malcev,
)
from nudfa.circuits import eval_circuit
from nudfa.fixtures import get_fixture
from nudfa.limits import default_budget
from nudfa.partitions import Partition


def test_make_op_and_eval():
    alg = FiniteAlgebra(
        "Z4", 4, (make_op("+", 2, 4, lambda a, b: (a + b) % 4),)
    )
    assert alg.eval_op("+", (3, 2)) == 1
    assert alg.op_arity("+") == 2
    with pytest.raises(KeyError):
        alg.op("*")


def test_json_round_trip():
    alg = get_fixture("Z6%2").algebra
    back = FiniteAlgebra.from_json(alg.to_json())
    assert back == alg


def test_unary_clone_of_cyclic_group_is_affine_maps():
    z6 = get_fixture("Z6").algebra
    clone = UnaryClone(z6, default_budget())
    tables = {fn.values for fn in clone}
    assert tables == {
        tuple((k * x + c) % 6 for x in range(6))
        for k in range(6)
        for c in range(6)
    }


def test_unary_clone_lookup_and_find():
    zm = get_fixture("Z6%2").algebra
    clone = UnaryClone(zm, default_budget())
    ident = clone.lookup(tuple(range(6)))
    assert ident is not None and ident.is_idempotent()
    # 0 and 2 are congruent mod 2 but their images 0 and 1 are not, so no
    # polynomial realizes this table
    missing = clone.lookup((0, 0, 1, 0, 0, 0))
    assert missing is None
    halver = clone.find(lambda fn: fn.image == frozenset({0, 2, 4}))
    assert halver is not None
    assert all(v in (0, 2, 4) for v in halver.values)


def test_clone_functions_certified_by_witness_circuits():
    zm = get_fixture("Z6%2").algebra
    clone = UnaryClone(zm, default_budget())
    for fn in clone:
        for x in range(6):
            assert eval_circuit(zm, fn.witness, (x,)) == fn.values[x]


def test_difference_polynomial_search_and_verify():
    z6 = get_fixture("Z6").algebra
    found = find_malcev_polynomial(z6, budget=default_budget())
    assert found is not None and verify_malcev(z6, found)
    lat2 = get_fixture("LAT2").algebra
    assert find_malcev_polynomial(lat2, budget=default_budget()) is None


def test_recorded_fixture_differences_verify():
    for name in ("Z2", "Z3", "Z4", "Z6", "Z6%2", "S3"):
        fix = get_fixture(name)
        assert fix.malcev is not None
        assert verify_malcev(fix.algebra, fix.malcev)


def test_quotient_algebra_is_homomorphic_image():
    z6 = get_fixture("Z6").algebra
    part = Partition.from_blocks(6, [[0, 2, 4], [1, 3, 5]])
    quo, mapping = quotient_algebra(z6, part)
    assert quo.size == 2
    for a in range(6):
        for b in range(6):
            assert (
                quo.eval_op("+", (mapping[a], mapping[b]))
                == mapping[z6.eval_op("+", (a, b))]
            )
