"""Layered counting circuits: gates, evaluation, shape discipline, JSON."""

from __future__ import annotations

import pytest

from nudfa.modcircuit import (
    AND,
    MOD,
    OR,
    SUMP,
    SUMPC,
    CCircuit,
    Gate,
    cc_truth_table,
    eval_cc,
    format_shape,
    parse_shape,
    shape_of,
    validate_shape,
)

IDENT2 = ((1, 0), (0, 1))


def mod_parity_circuit():
    gate = Gate(MOD, 1, ((0, 1), (1, 2)), m=2, accepting=frozenset({1}))
    return CCircuit(inputs=2, gates=(gate,), output=2, declared_shape="MOD(2)")


def and_or_circuit():
    g1 = Gate(AND, 1, ((0, 1), (1, 1)))
    g2 = Gate(AND, 1, ((0, 1),))
    g3 = Gate(OR, 2, ((2, 1), (3, 1)))
    return CCircuit(
        inputs=2, gates=(g1, g2, g3), output=4, declared_shape="AND(*)∘OR(*)"
    )


def open_sum_circuit():
    gate = Gate(
        SUMP, 1, ((0, 1),), p=3, nu=2, coeffs=(IDENT2,), offset=(0, 2)
    )
    return CCircuit(inputs=1, gates=(gate,), output=1, declared_shape="SUMP(3)")


# -- gate validation ---------------------------------------------------------


def test_gate_rejects_unknown_kinds_and_bad_multiplicities():
    with pytest.raises(ValueError):
        Gate("XOR", 1, ())
    with pytest.raises(ValueError):
        Gate(AND, 1, ((0, 0),))


def test_mod_gate_validation():
    with pytest.raises(ValueError):
        Gate(MOD, 1, (), m=0)
    with pytest.raises(ValueError):
        Gate(MOD, 1, (), m=2, accepting=frozenset({2}))


def test_sum_gate_validation():
    with pytest.raises(ValueError):
        Gate(SUMP, 1, (), p=1, nu=1)
    with pytest.raises(ValueError):
        Gate(SUMP, 1, ((0, 1),), p=3, nu=2, coeffs=(), offset=(0, 0))
    with pytest.raises(ValueError):
        Gate(
            SUMP, 1, ((0, 1),), p=3, nu=2, coeffs=(((1,),),), offset=(0, 0)
        )
    with pytest.raises(ValueError):
        Gate(SUMP, 1, ((0, 1),), p=3, nu=2, coeffs=(IDENT2,), offset=(0,))
    with pytest.raises(ValueError):
        Gate(
            SUMPC, 1, ((0, 1),), p=3, nu=2,
            coeffs=(IDENT2,), offset=(0, 0), target=(1,),
        )


def test_circuit_rejects_forward_wires_and_bad_output():
    forward = Gate(AND, 1, ((1, 1),))
    with pytest.raises(ValueError):
        CCircuit(inputs=1, gates=(forward,), output=1, declared_shape="AND(*)")
    ok = Gate(AND, 1, ((0, 1),))
    with pytest.raises(ValueError):
        CCircuit(inputs=1, gates=(ok,), output=5, declared_shape="AND(*)")


# -- evaluation --------------------------------------------------------------


def test_mod_gate_counts_with_multiplicity():
    circ = mod_parity_circuit()
    # x0 + 2 x1 mod 2 == x0
    assert cc_truth_table(circ) == [0, 1, 0, 1]


def test_and_or_evaluation():
    circ = and_or_circuit()
    assert cc_truth_table(circ) == [0, 1, 0, 1]
    assert circ.size == 3 + 5


def test_open_sum_output_is_a_vector():
    circ = open_sum_circuit()
    assert eval_cc(circ, (0,)) == (0, 2)
    assert eval_cc(circ, (1,)) == (1, 0)


def test_closed_sum_gate_compares_to_target():
    gate = Gate(
        SUMPC, 1, ((0, 1),), p=3, nu=2,
        coeffs=(IDENT2,), offset=(0, 2), target=(1, 0),
    )
    circ = CCircuit(inputs=1, gates=(gate,), output=1, declared_shape="SUMPC(3)")
    assert cc_truth_table(circ) == [0, 1]


def test_vector_valued_gates_cannot_feed_other_gates():
    vec = Gate(SUMP, 1, ((0, 1),), p=3, nu=1, coeffs=(((1,),),), offset=(0,))
    top = Gate(AND, 2, ((1, 1),))
    circ = CCircuit(
        inputs=1, gates=(vec, top), output=2, declared_shape="SUMP(3)∘AND(*)"
    )
    with pytest.raises(ValueError):
        eval_cc(circ, (1,))


def test_eval_rejects_wrong_word_length():
    with pytest.raises(ValueError):
        eval_cc(mod_parity_circuit(), (0, 1, 1))


# -- shapes ------------------------------------------------------------------


def test_parse_shape_accepts_both_separators_and_wildcards():
    layers = parse_shape("AND(3).MOD(6)∘SUMP(*)")
    assert [(l.kind, l.param) for l in layers] == [
        (AND, 3), (MOD, 6), (SUMP, None),
    ]
    assert format_shape(layers) == "AND(3)∘MOD(6)∘SUMP(*)"
    with pytest.raises(ValueError):
        parse_shape("NAND(2)")


def test_shape_of_reads_layers_input_first():
    assert shape_of(and_or_circuit()) == "AND(*)∘OR(*)"
    assert shape_of(mod_parity_circuit()) == "MOD(2)"
    assert shape_of(open_sum_circuit()) == "SUMP(3)"


def test_validate_shape_passes_conforming_circuits():
    ok, problems = validate_shape(and_or_circuit())
    assert ok and problems == []
    ok, _ = validate_shape(and_or_circuit(), "AND(2)∘OR(2)")
    assert ok


def test_validate_shape_reports_violations():
    ok, problems = validate_shape(and_or_circuit(), "AND(1)∘OR(*)")
    assert not ok and any("fan-in" in p for p in problems)
    ok, problems = validate_shape(mod_parity_circuit(), "MOD(3)")
    assert not ok and any("modulus" in p for p in problems)
    ok, problems = validate_shape(and_or_circuit(), "OR(*)∘AND(*)")
    assert not ok
    # output must live in the final declared layer
    ok, problems = validate_shape(and_or_circuit(), "AND(*)∘OR(*)∘AND(*)")
    assert not ok


def test_layer_skipping_wires_are_flagged():
    g1 = Gate(AND, 1, ((0, 1),))
    g2 = Gate(OR, 2, ((0, 1), (1, 1)))  # wire straight from the inputs
    circ = CCircuit(
        inputs=1, gates=(g1, g2), output=2, declared_shape="AND(*)∘OR(*)"
    )
    ok, problems = validate_shape(circ)
    assert not ok and any("layer" in p for p in problems)


def test_non_output_open_sum_is_flagged():
    vec = Gate(SUMP, 1, ((0, 1),), p=3, nu=1, coeffs=(((1,),),), offset=(0,))
    top = Gate(AND, 2, ((1, 1),))
    circ = CCircuit(
        inputs=1, gates=(vec, top), output=2, declared_shape="SUMP(3)∘AND(*)"
    )
    ok, problems = validate_shape(circ)
    assert not ok and any("vector" in p for p in problems)


# -- serialization -----------------------------------------------------------


@pytest.mark.parametrize(
    "make", [mod_parity_circuit, and_or_circuit, open_sum_circuit]
)
def test_json_round_trip(make):
    circ = make()
    back = CCircuit.from_json(circ.to_json())
    assert back == circ
    assert cc_truth_table(back) == cc_truth_table(circ)


def test_file_round_trip(tmp_path):
    circ = and_or_circuit()
    path = tmp_path / "circ.json"
    circ.dump(str(path))
    assert CCircuit.load(str(path)) == circ
