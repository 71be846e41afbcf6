"""Finite-field polynomial toolkit: interpolation, coset sums, CNF algebra."""

from __future__ import annotations

import itertools
import random

import pytest

from nudfa.fieldpoly import (
    Cnf3,
    MultilinearPoly,
    clause_poly,
    coset_indicator_form,
    divisibility_coeffs,
    divisibility_poly,
    flat_index,
    multilinear_interpolate,
    parse_dimacs,
    pseudo_and,
)


def all_words(n):
    return itertools.product((0, 1), repeat=n)


# -- multilinear polynomials -------------------------------------------------


def test_interpolation_matches_the_table_pointwise():
    rng = random.Random(11)
    for p in (2, 3, 5):
        for n in (1, 2, 3, 4):
            table = [rng.randrange(p) for _ in range(1 << n)]
            poly = multilinear_interpolate(table, p)
            assert poly.degree() <= n
            for row in range(1 << n):
                point = [(row >> i) & 1 for i in range(n)]
                assert poly.eval(point) == table[row] % p
                assert poly.eval_sparse(
                    [i for i in range(n) if point[i]]
                ) == table[row] % p


def test_interpolation_of_named_tables():
    parity = multilinear_interpolate([0, 1, 1, 0], 2)
    assert parity.terms == {frozenset({0}): 1, frozenset({1}): 1}
    conj = multilinear_interpolate([0, 0, 0, 1], 3)
    assert conj.terms == {frozenset({0, 1}): 1}


def test_interpolation_rejects_non_power_of_two_tables():
    with pytest.raises(ValueError):
        multilinear_interpolate([0, 1, 1], 2)


def test_ring_operations_agree_with_pointwise_arithmetic():
    rng = random.Random(5)
    p, n = 5, 3
    for _ in range(10):
        f = multilinear_interpolate([rng.randrange(p) for _ in range(8)], p)
        g = multilinear_interpolate([rng.randrange(p) for _ in range(8)], p)
        c = rng.randrange(p)
        for point in all_words(n):
            assert f.add(g).eval(point) == (f.eval(point) + g.eval(point)) % p
            assert f.sub(g).eval(point) == (f.eval(point) - g.eval(point)) % p
            assert f.scale(c).eval(point) == c * f.eval(point) % p
            assert f.mul(g).eval(point) == f.eval(point) * g.eval(point) % p
            assert f.power(3).eval(point) == pow(f.eval(point), 3, p)


def test_substitution_composes_polynomials():
    p = 3
    f = MultilinearPoly.affine(p, {0: 1, 1: 1})  # x0 + x1
    g = MultilinearPoly.variable(p, 2)
    h = f.substitute({0: g})
    for point in all_words(3):
        assert h.eval(point) == (point[2] + point[1]) % p


# -- coset indicator sums ----------------------------------------------------


def test_flat_index_is_big_endian():
    assert flat_index((1, 2), 3) == 5
    assert flat_index((2, 1, 0), 6) == 78
    assert flat_index((), 4) == 0


@pytest.mark.parametrize("m,p", [(2, 3), (3, 2), (6, 5)])
@pytest.mark.parametrize("s", [1, 2])
def test_coset_form_reproduces_random_functions(m, p, s):
    rng = random.Random(100 * m + p + s)
    for _ in range(5):
        table = [rng.randrange(p) for _ in range(m**s)]
        form = coset_indicator_form(table, m, s, p)
        assert form.m == m and form.p == p and form.s == s
        for xs in itertools.product(range(m), repeat=s):
            assert form.eval(xs) == table[flat_index(xs, m)]


def test_coset_form_rejects_bad_parameters():
    with pytest.raises(ValueError):
        coset_indicator_form([0, 1, 0, 1], 4, 1, 3)  # wrong table length
    with pytest.raises(ValueError):
        coset_indicator_form([0, 1], 2, 1, 4)  # composite p
    with pytest.raises(ValueError):
        coset_indicator_form([0, 1, 2], 3, 1, 3)  # shared prime


# -- divisibility polynomials ------------------------------------------------


@pytest.mark.parametrize("p,nu", [(2, 1), (2, 2), (3, 1)])
@pytest.mark.parametrize("ell", [4, 7])
def test_divisibility_polynomial_tracks_zero_counts(p, nu, ell):
    bound = p**nu
    poly = divisibility_poly(ell, p, nu)
    assert poly.degree() <= bound - 1
    for point in all_words(ell):
        zeros = ell - sum(point)
        expected = 0 if zeros % bound == 0 else 1
        assert poly.eval(point) == expected


def test_divisibility_coeffs_reject_bad_parameters():
    with pytest.raises(ValueError):
        divisibility_coeffs(5, 4, 1)
    with pytest.raises(ValueError):
        divisibility_coeffs(5, 2, 0)


# -- CNF handling ------------------------------------------------------------


def test_cnf_validation_and_counting():
    cnf = Cnf3(3, ((1, -2, 3), (2, 2, 2)))
    assert cnf.satisfied([1, 1, 1])
    assert not cnf.satisfied([0, 0, 0])  # second clause forces x2
    assert cnf.unsat_count([0, 0, 0]) == 1
    with pytest.raises(ValueError):
        Cnf3(2, ((1, -3, 2),))
    with pytest.raises(ValueError):
        Cnf3(2, ((0, 1, 2),))


def test_parse_dimacs_pads_and_validates():
    text = """c tiny example
p cnf 3 2
1 -2 0
2 3 0
"""
    cnf = parse_dimacs(text)
    assert cnf.num_vars == 3
    assert len(cnf.clauses) == 2
    assert all(len(c) == 3 for c in cnf.clauses)
    assert set(cnf.clauses[0]) == {1, -2}
    assert set(cnf.clauses[1]) == {2, 3}
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 4 1\n1 2 3 4 0\n")
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 2 1\n1 2\n")


def test_clause_polynomial_is_the_satisfaction_indicator():
    rng = random.Random(9)
    for p in (2, 3):
        for _ in range(10):
            n = rng.randint(2, 4)
            clause = tuple(
                rng.choice([-1, 1]) * rng.randint(1, n) for _ in range(3)
            )
            poly = clause_poly(p, clause)
            for point in all_words(n):
                want = 1 if Cnf3.clause_value(clause, point) else 0
                assert poly.eval(point) == want


@pytest.mark.parametrize("p,nu", [(2, 1), (2, 2), (3, 1)])
def test_pseudo_and_vanishes_on_divisible_unsat_counts(p, nu):
    cnf = parse_dimacs(
        "p cnf 4 5\n1 2 3 0\n-1 2 4 0\n-2 -3 4 0\n1 -4 3 0\n-1 -2 -3 0\n"
    )
    bound = p**nu
    poly = pseudo_and(cnf, p, nu)
    assert poly.degree() <= 3 * (bound - 1)
    for point in all_words(cnf.num_vars):
        want_zero = cnf.unsat_count(point) % bound == 0
        assert (poly.eval(point) == 0) == want_zero
