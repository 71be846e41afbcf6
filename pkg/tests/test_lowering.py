"""Rewriting passes: random circuits in, exact tables and valid shapes out."""

from __future__ import annotations

import random

import pytest

from conftest import scalar

from nudfa.lowering import (
    and_sum_lower,
    apply_func,
    collapse_5to3,
    finalize_boolean_sum,
    modm_andd_to_sum,
    unmod,
)
from nudfa.modcircuit import (
    AND,
    MOD,
    SUMPC,
    CCircuit,
    Gate,
    cc_truth_table,
    validate_shape,
)


def rand_subset(rng, m):
    return frozenset(x for x in range(m) if rng.random() < 0.45)


def rand_mod_gate(rng, lo, hi, layer, m):
    width = rng.randint(1, 3)
    wires = tuple(
        (rng.randrange(lo, hi), rng.randint(1, m)) for _ in range(width)
    )
    return Gate(MOD, layer, wires, m=m, accepting=rand_subset(rng, m))


def rand_mod_mod(rng, n, m, p):
    """MOD(m) layer feeding one MOD(p) output gate."""
    inner = rng.randint(1, 3)
    gates = [rand_mod_gate(rng, 0, n, 1, m) for _ in range(inner)]
    out_wires = tuple(
        (n + i, rng.randint(1, p)) for i in range(inner) if rng.random() < 0.8
    ) or ((n, 1),)
    gates.append(
        Gate(MOD, 2, out_wires, m=p, accepting=rand_subset(rng, p))
    )
    return CCircuit(n, tuple(gates), n + inner, f"MOD({m})∘MOD({p})")


def rand_mod_and(rng, n, m):
    """MOD(m) layer feeding one AND output gate."""
    inner = rng.randint(1, 3)
    gates = [rand_mod_gate(rng, 0, n, 1, m) for _ in range(inner)]
    out_wires = tuple((n + i, 1) for i in range(inner))
    gates.append(Gate(AND, 2, out_wires))
    return CCircuit(n, tuple(gates), n + inner, f"MOD({m})∘AND(*)")


def rand_five_layer(rng, n, m, p, nu):
    """AND∘MOD(m)∘MOD(p)∘AND∘SUMPC(p, nu) with random wiring throughout."""
    gates = []
    ands1 = rng.randint(1, 3)
    for _ in range(ands1):
        width = rng.randint(1, min(2, n))
        gates.append(
            Gate(AND, 1, tuple((rng.randrange(n), 1) for _ in range(width)))
        )
    mods = rng.randint(1, 3)
    for _ in range(mods):
        gates.append(rand_mod_gate(rng, n, n + ands1, 2, m))
    ps = rng.randint(1, 3)
    base = n + ands1
    for _ in range(ps):
        gates.append(rand_mod_gate(rng, base, base + mods, 3, p))
    ands2 = rng.randint(1, 2)
    base = n + ands1 + mods
    for _ in range(ands2):
        width = rng.randint(1, 2)
        gates.append(
            Gate(
                AND, 4,
                tuple((rng.randrange(base, base + ps), 1) for _ in range(width)),
            )
        )
    base = n + ands1 + mods + ps
    wires = tuple((base + i, 1) for i in range(ands2))
    coeffs = tuple(
        tuple(
            tuple(rng.randrange(p) for _ in range(nu)) for _ in range(nu)
        )
        for _ in wires
    )
    gates.append(
        Gate(
            SUMPC, 5, wires, p=p, nu=nu, coeffs=coeffs,
            offset=tuple(rng.randrange(p) for _ in range(nu)),
            target=tuple(rng.randrange(p) for _ in range(nu)),
        )
    )
    return CCircuit(
        n, tuple(gates), n + len(gates) - 1,
        f"AND(*)∘MOD({m})∘MOD({p})∘AND(*)∘SUMPC({p})",
    )


def assert_exact(after, before_table, report, pass_name):
    assert report.pass_name == pass_name
    assert report.verified is True
    ok, problems = validate_shape(after)
    assert ok, problems
    assert [scalar(v) for v in cc_truth_table(after)] == [
        scalar(v) for v in before_table
    ]


def test_table_to_and_sum_is_exact():
    rng = random.Random(1)
    for _ in range(6):
        p = rng.choice([2, 3, 5])
        n = rng.randint(1, 4)
        k = rng.choice([1, 2])
        table = [
            tuple(rng.randrange(p) for _ in range(k)) for _ in range(1 << n)
        ]
        circ, report = and_sum_lower(table, p)
        assert_exact(circ, table, report, "and_sum_lower")
        assert circ.declared_shape == f"AND({n})∘SUMP({p})"


def test_mod_and_collapses_to_mod_sum():
    rng = random.Random(2)
    for _ in range(6):
        m, p = rng.choice([(2, 3), (3, 2), (6, 5)])
        circ = rand_mod_and(rng, rng.randint(2, 4), m)
        lowered, report = modm_andd_to_sum(circ, p)
        assert_exact(lowered, cc_truth_table(circ), report, "modm_andd_to_sum")


def test_unmod_removes_the_outer_mod_gate():
    rng = random.Random(3)
    for _ in range(6):
        m, p = rng.choice([(2, 3), (3, 2), (6, 5)])
        circ = rand_mod_mod(rng, rng.randint(2, 4), m, p)
        lowered, report = unmod(circ)
        assert_exact(lowered, cc_truth_table(circ), report, "unmod")


def test_finalize_turns_a_boolean_sum_into_a_mod_gate():
    rng = random.Random(4)
    for _ in range(4):
        m, p = rng.choice([(2, 3), (3, 2)])
        circ = rand_mod_mod(rng, 3, m, p)
        lowered, _ = unmod(circ)
        closed = finalize_boolean_sum(lowered)
        assert closed.gates[-1].kind == MOD
        assert cc_truth_table(closed) == cc_truth_table(circ)
        ok, problems = validate_shape(closed, f"MOD({m})∘MOD({p})")
        assert ok, problems


def test_finalize_rejects_non_sum_outputs():
    rng = random.Random(5)
    circ = rand_mod_mod(rng, 3, 2, 3)
    with pytest.raises(ValueError):
        finalize_boolean_sum(circ)


def test_apply_func_composes_boolean_functions():
    rng = random.Random(6)
    for _ in range(5):
        m, p = rng.choice([(2, 3), (3, 2)])
        n = rng.randint(2, 3)
        k = rng.randint(1, 2)
        fs = []
        for _ in range(k):
            circ = rand_mod_mod(rng, n, m, p)
            fs.append(finalize_boolean_sum(unmod(circ)[0]))
        g_table = [rng.randrange(2) for _ in range(1 << k)]
        combined, report = apply_func(g_table, fs)
        assert report.pass_name.startswith("apply_func")
        assert report.verified is True
        tables = [cc_truth_table(f) for f in fs]
        want = [
            g_table[sum(tables[j][w] << j for j in range(k))]
            for w in range(1 << n)
        ]
        assert [scalar(v) for v in cc_truth_table(combined)] == want
        ok, problems = validate_shape(combined)
        assert ok, problems


def test_five_layer_collapse_to_three():
    rng = random.Random(7)
    for _ in range(5):
        m, p = rng.choice([(2, 3), (3, 2)])
        nu = rng.choice([1, 2])
        circ = rand_five_layer(rng, rng.randint(2, 4), m, p, nu)
        lowered, report = collapse_5to3(circ, None)
        assert_exact(lowered, cc_truth_table(circ), report, "collapse_5to3")
        assert lowered.declared_shape.count("∘") == 2


def test_passes_reject_mismatched_shapes():
    rng = random.Random(8)
    and_circ = CCircuit(
        2, (Gate(AND, 1, ((0, 1), (1, 1))),), 2, "AND(*)"
    )
    with pytest.raises(ValueError):
        unmod(and_circ)
    with pytest.raises(ValueError):
        modm_andd_to_sum(and_circ, 3)
    with pytest.raises(ValueError):
        collapse_5to3(and_circ)
    with pytest.raises(ValueError):
        and_sum_lower([0, 1, 1], 3)


def test_unmod_rejects_shared_primes():
    # inner and outer moduli must be coprime
    gates = (
        Gate(MOD, 1, ((0, 1),), m=2, accepting=frozenset({1})),
        Gate(MOD, 2, ((1, 1),), m=2, accepting=frozenset({1})),
    )
    circ = CCircuit(1, gates, 2, "MOD(2)∘MOD(2)")
    with pytest.raises(ValueError):
        unmod(circ)


def test_reports_track_sizes():
    rng = random.Random(9)
    circ = rand_mod_mod(rng, 3, 2, 3)
    lowered, report = unmod(circ)
    assert report.input_size == circ.size
    assert report.output_size == lowered.size
    assert report.input_shape == "MOD(2)∘MOD(3)"
