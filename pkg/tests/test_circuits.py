"""Circuit DAG construction, evaluation, composition, serialization."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_alg_circuit
from nudfa.algebra import FiniteAlgebra, make_op
from nudfa.circuits import (
    AlgCircuit,
    CircuitBuilder,
    compose,
    constant_circuit,
    eval_circuit,
    variable_circuit,
)
from nudfa.fixtures import get_fixture

Z6 = get_fixture("Z6").algebra


def test_builder_hash_conses_duplicate_gates():
    b = CircuitBuilder(2)
    g1 = b.gate("+", b.var(0), b.var(1))
    g2 = b.gate("+", b.var(0), b.var(1))
    assert g1 == g2


def test_variable_and_constant_circuits():
    assert eval_circuit(Z6, variable_circuit(3, 1), (4, 5, 0)) == 5
    assert eval_circuit(Z6, constant_circuit(2, 3), (0, 0)) == 3


def test_unused_variables_keep_arity():
    b = CircuitBuilder(3)
    [b.var(i) for i in range(3)]
    circ = b.finish(b.var(1))
    assert circ.k == 3
    assert eval_circuit(Z6, circ, (1, 2, 3)) == 2


def test_inline_substitutes_arguments():
    inner = variable_circuit(1, 0)
    b = CircuitBuilder(2)
    s = b.gate("+", b.var(0), b.var(1))
    out = b.inline(inner, [s])
    circ = b.finish(out)
    assert eval_circuit(Z6, circ, (2, 3)) == 5


def test_compose_matches_manual_evaluation():
    b = CircuitBuilder(2)
    outer = b.finish(b.gate("+", b.var(0), b.var(1)))
    rng = random.Random(3)
    inners = [random_alg_circuit(rng, Z6, 2, 4) for _ in range(2)]
    combined = compose(outer, inners, 2)
    for x in range(6):
        for y in range(6):
            want = (
                eval_circuit(Z6, inners[0], (x, y))
                + eval_circuit(Z6, inners[1], (x, y))
            ) % 6
            assert eval_circuit(Z6, combined, (x, y)) == want


def test_eval_rejects_wrong_arity():
    circ = variable_circuit(2, 0)
    with pytest.raises(ValueError):
        eval_circuit(Z6, circ, (1,))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_json_round_trip_preserves_semantics(seed):
    rng = random.Random(seed)
    circ = random_alg_circuit(rng, Z6, 2, 5)
    back = AlgCircuit.from_json(circ.to_json())
    for x in range(6):
        for y in range(6):
            assert eval_circuit(Z6, back, (x, y)) == eval_circuit(
                Z6, circ, (x, y)
            )


def test_evaluation_checks_operation_and_arity():
    tiny = FiniteAlgebra("B", 2, (make_op("not", 1, 2, lambda x: 1 - x),))
    b = CircuitBuilder(1)
    bad_name = b.finish(b.gate("xor", b.var(0)))
    with pytest.raises(KeyError):
        eval_circuit(tiny, bad_name, (0,))
    b = CircuitBuilder(1)
    bad_arity = b.finish(b.gate("not", b.var(0), b.var(0)))
    with pytest.raises(ValueError):
        eval_circuit(tiny, bad_arity, (0,))
    b = CircuitBuilder(1)
    circ = b.finish(b.gate("not", b.var(0)))
    assert eval_circuit(tiny, circ, (0,)) == 1
