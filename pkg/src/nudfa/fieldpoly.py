"""Polynomials over GF(p) used by the circuit lowerings.

Three tools live here:

- multilinear polynomials over boolean variables, with interpolation from
  truth tables (every boolean function has a unique multilinear form);
- the coset-indicator normal form: any f: Z_m^s -> Z_p with gcd(m, p) = 1
  as a Z_p-combination of indicators [beta . x + u == 0 (mod m)], built by a
  recursion on the arity for each prime factor of m and glued by CRT;
- divisibility polynomials and the pseudo-AND of a 3-CNF: a multilinear
  polynomial over GF(p) of degree <= 3(p^nu - 1) that vanishes exactly when
  the number of unsatisfied clauses is divisible by p^nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Iterable, Optional, Sequence

from .limits import Budget, charge, default_budget


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in range(2, int(p**0.5) + 1):
        if p % q == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Multilinear polynomials
# ---------------------------------------------------------------------------


class MultilinearPoly:
    """Multilinear polynomial over GF(p): dict from variable subsets
    (frozensets of indices) to nonzero coefficients."""

    __slots__ = ("p", "terms")

    def __init__(self, p: int, terms: Optional[dict] = None):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.terms: dict[frozenset[int], int] = {}
        if terms:
            for key, coeff in terms.items():
                c = coeff % p
                if c:
                    self.terms[frozenset(key)] = c

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(p: int, c: int) -> "MultilinearPoly":
        return MultilinearPoly(p, {frozenset(): c})

    @staticmethod
    def variable(p: int, i: int) -> "MultilinearPoly":
        return MultilinearPoly(p, {frozenset([i]): 1})

    @staticmethod
    def affine(p: int, coeffs: dict, const: int = 0) -> "MultilinearPoly":
        terms = {frozenset([i]): c for i, c in coeffs.items()}
        terms[frozenset()] = const
        return MultilinearPoly(p, terms)

    def copy(self) -> "MultilinearPoly":
        out = MultilinearPoly(self.p)
        out.terms = dict(self.terms)
        return out

    # -- structure ---------------------------------------------------------

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def support(self) -> frozenset[int]:
        out: set[int] = set()
        for k in self.terms:
            out |= k
        return frozenset(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultilinearPoly)
            and self.p == other.p
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        items = sorted(self.terms.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
        body = " + ".join(
            f"{c}*{'.'.join('x%d' % v for v in sorted(k)) or '1'}" for k, c in items
        )
        return f"MultilinearPoly(p={self.p}, {body or '0'})"

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "MultilinearPoly") -> None:
        if self.p != other.p:
            raise ValueError("mixed characteristics")

    def add(self, other: "MultilinearPoly") -> "MultilinearPoly":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = (out.get(k, 0) + c) % self.p
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        res = MultilinearPoly(self.p)
        res.terms = out
        return res

    def scale(self, c: int) -> "MultilinearPoly":
        c %= self.p
        if c == 0:
            return MultilinearPoly(self.p)
        res = MultilinearPoly(self.p)
        res.terms = {k: (v * c) % self.p for k, v in self.terms.items()}
        return res

    def sub(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self.add(other.scale(-1))

    def mul(
        self, other: "MultilinearPoly", budget: Optional[Budget] = None
    ) -> "MultilinearPoly":
        """Product with the multilinear reduction x*x = x."""
        self._check(other)
        budget = budget or default_budget()
        out: dict[frozenset[int], int] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 | k2
                v = (out.get(k, 0) + c1 * c2) % self.p
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
            charge(len(out), budget.monomials, "multilinear product")
        res = MultilinearPoly(self.p)
        res.terms = out
        return res

    def power(self, e: int, budget: Optional[Budget] = None) -> "MultilinearPoly":
        res = MultilinearPoly.constant(self.p, 1)
        for _ in range(e):
            res = res.mul(self, budget)
        return res

    def substitute(
        self,
        mapping: dict[int, "MultilinearPoly"],
        budget: Optional[Budget] = None,
    ) -> "MultilinearPoly":
        """Replace each variable by a polynomial (multilinear composition;
        only sound when the substituted values are 0/1-valued)."""
        res = MultilinearPoly(self.p)
        for k, c in self.terms.items():
            term = MultilinearPoly.constant(self.p, c)
            for v in sorted(k):
                term = term.mul(mapping.get(v, MultilinearPoly.variable(self.p, v)), budget)
            res = res.add(term)
        return res

    # -- evaluation --------------------------------------------------------

    def eval(self, assignment: Sequence[int]) -> int:
        total = 0
        for k, c in self.terms.items():
            v = c
            for i in k:
                v = (v * assignment[i]) % self.p
            total += v
        return total % self.p

    def eval_sparse(self, ones: Iterable[int]) -> int:
        on = set(ones)
        total = 0
        for k, c in self.terms.items():
            if k <= on:
                total += c
        return total % self.p


def multilinear_interpolate(table: Sequence[int], p: int) -> MultilinearPoly:
    """Unique multilinear polynomial matching a truth table over {0,1}^n.

    Row index encodes the assignment with variable 0 least significant.
    Uses the subset Moebius transform in place, O(n 2^n).
    """
    size = len(table)
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("table length must be a power of two")
    t = [v % p for v in table]
    for i in range(n):
        bit = 1 << i
        for mask in range(size):
            if mask & bit:
                t[mask] = (t[mask] - t[mask ^ bit]) % p
    terms = {}
    for mask in range(size):
        if t[mask]:
            terms[frozenset(i for i in range(n) if mask >> i & 1)] = t[mask]
    return MultilinearPoly(p, terms)


# ---------------------------------------------------------------------------
# Coset-indicator normal form over Z_m
# ---------------------------------------------------------------------------


def flat_index(xs: Sequence[int], m: int) -> int:
    idx = 0
    for x in xs:
        idx = idx * m + x
    return idx


class CosetIndicatorSum:
    """f(x) = sum of mu * [beta . x + u == 0 (mod m)] with mu in GF(p).

    ``terms`` maps (beta tuple, u) to mu; gcd(m, p) = 1 throughout.
    """

    __slots__ = ("m", "p", "s", "terms")

    def __init__(self, m: int, p: int, s: int, terms: dict):
        self.m = m
        self.p = p
        self.s = s
        self.terms: dict[tuple[tuple[int, ...], int], int] = {}
        for (beta, u), mu in terms.items():
            mu %= p
            if mu:
                self.terms[(tuple(b % m for b in beta), u % m)] = mu

    def eval(self, xs: Sequence[int]) -> int:
        total = 0
        for (beta, u), mu in self.terms.items():
            if (sum(b * x for b, x in zip(beta, xs)) + u) % self.m == 0:
                total += mu
        return total % self.p

    def __len__(self) -> int:
        return len(self.terms)


def _zero_indicator_terms(q: int, k: int, p: int) -> dict:
    """Indicator of the zero tuple of Z_q^k as a combination of coset
    indicators, built by the arity-lowering recursion; q prime, q != p."""
    qinv = pow(q, -1, p)
    terms: dict[tuple[tuple[int, ...], int], int] = {((1,), 0): 1}
    for _ in range(2, k + 1):
        nxt: dict[tuple[tuple[int, ...], int], int] = {}

        def bump(beta: tuple[int, ...], u: int, mu: int) -> None:
            key = (beta, u % q)
            val = (nxt.get(key, 0) + mu) % p
            if val:
                nxt[key] = val
            else:
                nxt.pop(key, None)

        for (beta, u), mu in terms.items():
            head, last = beta[:-1], beta[-1]
            for i in range(q):
                bump(head + (last, (last * i) % q), u, mu * qinv)
            for i in range(1, q):
                bump(head + (0, last), u + last * i, -mu * qinv)
        terms = nxt
    return terms


def zero_indicator(q: int, k: int, p: int) -> CosetIndicatorSum:
    form = CosetIndicatorSum(q, p, k, _zero_indicator_terms(q, k, p))
    for xs in product(range(q), repeat=k):
        want = 1 if all(x == 0 for x in xs) else 0
        if form.eval(xs) != want:
            raise AssertionError(f"zero indicator wrong at {xs}")
    return form


def prime_factors(m: int) -> list[int]:
    out = []
    q = 2
    while q * q <= m:
        if m % q == 0:
            if m // q % q == 0:
                raise ValueError(f"{m} is not squarefree")
            out.append(q)
            m //= q
        q += 1
    if m > 1:
        out.append(m)
    return out


def coset_indicator_form(
    values: Sequence[int],
    m: int,
    s: int,
    p: int,
    budget: Optional[Budget] = None,
) -> CosetIndicatorSum:
    """Express f: Z_m^s -> Z_p (flat row-major table) in coset-indicator
    normal form; m squarefree and coprime to the prime p.

    First the zero-tuple indicator of Z_m^s is assembled: for each prime
    q | m the recursion gives the indicator of Z_q^s, which embeds into Z_m
    through multiplication by m/q, and the product over the primes collapses
    because an indicator product is the indicator of the CRT sum.  Shifting
    the zero indicator through every point and weighting by f recovers f.
    The result is verified pointwise before return.
    """
    budget = budget or default_budget()
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if math.gcd(m, p) != 1:
        raise ValueError("m and p must be coprime")
    if len(values) != m**s:
        raise ValueError(f"table must have {m ** s} entries")
    if m == 1:
        # only the empty linear form; f is a constant
        return CosetIndicatorSum(1, p, s, {((0,) * s, 0): values[0] % p})

    factors = prime_factors(m)
    zero_terms: dict[tuple[tuple[int, ...], int], int] = {((0,) * s, 0): 1}
    for q in factors:
        lift = m // q
        branch = {
            (tuple(b * lift % m for b in beta), u * lift % m): mu
            for (beta, u), mu in _zero_indicator_terms(q, s, p).items()
        }
        merged: dict[tuple[tuple[int, ...], int], int] = {}
        for (b1, u1), mu1 in zero_terms.items():
            for (b2, u2), mu2 in branch.items():
                key = (
                    tuple((x + y) % m for x, y in zip(b1, b2)),
                    (u1 + u2) % m,
                )
                val = (merged.get(key, 0) + mu1 * mu2) % p
                if val:
                    merged[key] = val
                else:
                    merged.pop(key, None)
            charge(len(merged), budget.monomials, "coset indicator product")
        zero_terms = merged

    out: dict[tuple[tuple[int, ...], int], int] = {}
    for idx, fval in enumerate(values):
        fval %= p
        if not fval:
            continue
        point = []
        rest = idx
        for _ in range(s):
            point.append(rest % m)
            rest //= m
        point.reverse()
        for (beta, u), mu in zero_terms.items():
            shift = (u - sum(b * a for b, a in zip(beta, point))) % m
            key = (beta, shift)
            val = (out.get(key, 0) + fval * mu) % p
            if val:
                out[key] = val
            else:
                out.pop(key, None)
        charge(len(out), budget.monomials, "coset indicator form")

    form = CosetIndicatorSum(m, p, s, out)
    for idx in range(m**s):
        point = []
        rest = idx
        for _ in range(s):
            point.append(rest % m)
            rest //= m
        point.reverse()
        if form.eval(point) != values[idx] % p:
            raise AssertionError(f"coset indicator form wrong at {tuple(point)}")
    return form


def coset_form_from_fn(
    fn: Callable[..., int], m: int, s: int, p: int, budget: Optional[Budget] = None
) -> CosetIndicatorSum:
    table = [fn(*xs) for xs in product(range(m), repeat=s)]
    return coset_indicator_form(table, m, s, p, budget)


# ---------------------------------------------------------------------------
# Divisibility polynomials and the CNF pseudo-AND
# ---------------------------------------------------------------------------


def divisibility_coeffs(ell: int, p: int, nu: int) -> list[int]:
    """Coefficients a_k (k = 0..p^nu - 1) of the symmetric multilinear
    polynomial over GF(p) in ell variables that vanishes exactly when the
    number of zero inputs is divisible by p^nu.

    Staged interpolation by support size: evaluating at an all-ones vector
    of weight k forces a_k once a_0..a_{k-1} are fixed.  Degree p^nu - 1
    suffices; the closing loop checks every weight 0..ell and raises if the
    truncation is wrong.
    """
    if not is_prime(p) or nu < 1:
        raise ValueError("need a prime p and nu >= 1")
    bound = p**nu

    def goal(k: int) -> int:
        return 0 if (ell - k) % bound == 0 else 1

    alphas: list[int] = []
    for k in range(min(bound, ell + 1)):
        acc = 0
        for j in range(k):
            acc += math.comb(k, j) * alphas[j]
        alphas.append((goal(k) - acc) % p)
    for k in range(ell + 1):
        acc = 0
        for j in range(min(k, len(alphas) - 1) + 1):
            acc += math.comb(k, j) * alphas[j]
        if acc % p != goal(k):
            raise AssertionError(
                f"degree bound violated: weight {k} evaluates to {acc % p}, "
                f"expected {goal(k)}"
            )
    return alphas


def divisibility_poly(
    ell: int, p: int, nu: int, budget: Optional[Budget] = None
) -> MultilinearPoly:
    """Materialised divisibility polynomial in variables 0..ell-1."""
    budget = budget or default_budget()
    alphas = divisibility_coeffs(ell, p, nu)
    terms: dict[frozenset[int], int] = {}
    count = 0
    for k, a in enumerate(alphas):
        if a == 0:
            continue
        for combo in combinations(range(ell), k):
            terms[frozenset(combo)] = a
            count += 1
            charge(count, budget.monomials, "divisibility polynomial")
    return MultilinearPoly(p, terms)


@dataclass(frozen=True)
class Cnf3:
    """3-CNF over variables 1..num_vars; clauses hold exactly three DIMACS
    literals (repetition allowed, so shorter clauses are padded)."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"bad literal {lit}")

    def satisfied(self, assignment: Sequence[int]) -> bool:
        """assignment[i] is the value of variable i+1."""
        return all(self.clause_value(c, assignment) for c in self.clauses)

    def unsat_count(self, assignment: Sequence[int]) -> int:
        return sum(1 for c in self.clauses if not self.clause_value(c, assignment))

    @staticmethod
    def clause_value(clause: Sequence[int], assignment: Sequence[int]) -> bool:
        return any(
            (assignment[abs(l) - 1] == 1) == (l > 0) for l in clause
        )


def parse_dimacs(text: str) -> Cnf3:
    """DIMACS CNF reader; clauses wider than 3 distinct literals are refused
    (no clause splitting), shorter clauses are padded by repetition."""
    num_vars = None
    clauses: list[tuple[int, int, int]] = []
    pending: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if not pending:
                    raise ValueError("empty clause in DIMACS input")
                distinct = sorted(set(pending), key=abs)
                if len(distinct) > 3:
                    raise ValueError(
                        f"clause {pending} has {len(distinct)} distinct "
                        "literals; width more than 3 is not supported"
                    )
                while len(pending) < 3:
                    pending.append(pending[0])
                clauses.append(tuple(pending[:3]))
                pending = []
            else:
                pending.append(lit)
    if pending:
        raise ValueError("trailing clause without terminating 0")
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    return Cnf3(num_vars, tuple(clauses))


def clause_poly(p: int, clause: Sequence[int]) -> MultilinearPoly:
    """1 - (literal-is-false product): 1 iff the clause is satisfied.
    Variable i of the polynomial is DIMACS variable i+1."""
    prod = MultilinearPoly.constant(p, 1)
    for lit in clause:
        var = MultilinearPoly.variable(p, abs(lit) - 1)
        if lit > 0:
            hat = MultilinearPoly.constant(p, 1).sub(var)
        else:
            hat = var
        prod = prod.mul(hat)
    return MultilinearPoly.constant(p, 1).sub(prod)


def pseudo_and(
    cnf: Cnf3, p: int, nu: int, budget: Optional[Budget] = None
) -> MultilinearPoly:
    """Multilinear polynomial over GF(p) in the CNF's variables that is zero
    exactly when the number of unsatisfied clauses is divisible by p^nu.

    Substitutes the clause-satisfaction polynomials into the divisibility
    polynomial; degree is at most 3(p^nu - 1).
    """
    budget = budget or default_budget()
    ell = len(cnf.clauses)
    alphas = divisibility_coeffs(ell, p, nu)
    cpolys = [clause_poly(p, c) for c in cnf.clauses]
    total = MultilinearPoly(p)
    for k, a in enumerate(alphas):
        if a == 0:
            continue
        for combo in combinations(range(ell), k):
            term = MultilinearPoly.constant(p, a)
            for i in combo:
                term = term.mul(cpolys[i], budget)
            total = total.add(term)
    if total.degree() > 3 * (p**nu - 1):
        raise AssertionError("pseudo-AND degree bound violated")
    return total
