"""Congruence lattices and commutator-based structure theory.

Principal congruences are generated by closing a pair under all unary
polynomials and taking the symmetric-transitive closure; the full lattice is
the join-closure of the principal congruences.  The binary commutator is the
term-condition commutator, computed from the matrix subalgebra of A^4.  On
top of these sit characteristics of prime quotients, intervals that decompose
into independent single-prime pieces, and the distinguished congruences that
drive the circuit compiler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

import numpy as np

from .algebra import FiniteAlgebra, UnaryClone, quotient_algebra, respects
from .limits import Budget, default_budget
from .partitions import Partition, all_partitions


def is_congruence(algebra: FiniteAlgebra, part: Partition) -> bool:
    """True iff the partition is compatible with every basic operation."""
    return respects(algebra, part)


def congruence_generated(
    algebra: FiniteAlgebra,
    pairs: Iterable[tuple[int, int]],
    clone: UnaryClone,
) -> Partition:
    """Least congruence containing the given pairs.

    The transitive closure of the unary-polynomial images of the generating
    pairs is already a congruence, so one pass over the clone suffices.
    """
    n = algebra.size
    out: list[tuple[int, int]] = []
    for a, b in pairs:
        if a == b:
            continue
        for fn in clone:
            out.append((fn.values[a], fn.values[b]))
    return Partition.from_pairs(n, out)


def principal_congruence(
    algebra: FiniteAlgebra, a: int, b: int, clone: UnaryClone
) -> Partition:
    return congruence_generated(algebra, [(a, b)], clone)


# ---------------------------------------------------------------------------
# Lattice
# ---------------------------------------------------------------------------


@dataclass
class CongruenceLattice:
    """All congruences of a finite algebra, with order data and caches."""

    algebra: FiniteAlgebra
    clone: UnaryClone
    elements: tuple[Partition, ...]  # canonically sorted
    _index: dict = field(repr=False)
    covers: tuple[tuple[int, int], ...]  # (lower, upper) index pairs
    _commutator: dict = field(default_factory=dict, repr=False)
    _char: dict = field(default_factory=dict, repr=False)
    _pupi: dict = field(default_factory=dict, repr=False)
    _quotient: dict = field(default_factory=dict, repr=False)

    # -- order helpers -----------------------------------------------------

    def index(self, part: Partition) -> int:
        try:
            return self._index[part]
        except KeyError:
            raise KeyError("partition is not a congruence of this algebra") from None

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, part: Partition) -> bool:
        return part in self._index

    @property
    def zero(self) -> Partition:
        return Partition.identity(self.algebra.size)

    @property
    def one(self) -> Partition:
        return Partition.total(self.algebra.size)

    def leq(self, lo: Partition, hi: Partition) -> bool:
        return lo.leq(hi)

    def interval(self, lo: Partition, hi: Partition) -> list[Partition]:
        return [c for c in self.elements if lo.leq(c) and c.leq(hi)]

    def covers_of(self, part: Partition) -> list[Partition]:
        i = self.index(part)
        return [self.elements[b] for a, b in self.covers if a == i]

    def subcovers_of(self, part: Partition) -> list[Partition]:
        i = self.index(part)
        return [self.elements[a] for a, b in self.covers if b == i]

    def cover_pairs(
        self, lo: Partition, hi: Partition
    ) -> list[tuple[Partition, Partition]]:
        """All covering pairs inside the interval [lo, hi]."""
        out = []
        for a, b in self.covers:
            ca, cb = self.elements[a], self.elements[b]
            if lo.leq(ca) and cb.leq(hi):
                out.append((ca, cb))
        return out

    def atoms(self) -> list[Partition]:
        return self.covers_of(self.zero)

    def join_irreducibles(self) -> list[Partition]:
        return [c for c in self.elements if len(self.subcovers_of(c)) == 1]

    def meet_irreducibles(self) -> list[Partition]:
        return [c for c in self.elements if len(self.covers_of(c)) == 1]

    def unique_subcover(self, part: Partition) -> Partition:
        subs = self.subcovers_of(part)
        if len(subs) != 1:
            raise ValueError(f"not join-irreducible: {len(subs)} subcovers")
        return subs[0]

    def unique_cover(self, part: Partition) -> Partition:
        ups = self.covers_of(part)
        if len(ups) != 1:
            raise ValueError(f"not meet-irreducible: {len(ups)} covers")
        return ups[0]

    def is_modular(self) -> bool:
        """No pentagon: a < b with a v c == b v c and a ^ c == b ^ c forces a == b."""
        for a in self.elements:
            for b in self.elements:
                if a.leq(b) and a != b:
                    for c in self.elements:
                        if a.join(c) == b.join(c) and a.meet(c) == b.meet(c):
                            return False
        return True

    # -- quotients ---------------------------------------------------------

    def quotient(self, part: Partition) -> tuple[FiniteAlgebra, tuple[int, ...]]:
        i = self.index(part)
        if i not in self._quotient:
            self._quotient[i] = quotient_algebra(self.algebra, part)
        return self._quotient[i]

    # -- commutator and solvability ----------------------------------------

    def commutator(self, left: Partition, right: Partition) -> Partition:
        key = (self.index(left), self.index(right))
        if key not in self._commutator:
            self._commutator[key] = commutator(
                self.algebra, left, right, self.clone
            )
        return self._commutator[key]

    def characteristic(self, lo: Partition, hi: Partition) -> int:
        key = (self.index(lo), self.index(hi))
        if key not in self._char:
            self._char[key] = characteristic(self.algebra, self, (lo, hi))
        return self._char[key]


def all_congruences(
    algebra: FiniteAlgebra,
    clone: Optional[UnaryClone] = None,
    budget: Optional[Budget] = None,
) -> CongruenceLattice:
    """Build the full congruence lattice (join-closure of principals)."""
    budget = budget or default_budget()
    if algebra.size > budget.lattice_universe:
        raise ValueError(
            f"universe {algebra.size} exceeds lattice bound "
            f"{budget.lattice_universe}"
        )
    clone = clone or UnaryClone(algebra, budget)
    n = algebra.size
    found: set[Partition] = {Partition.identity(n), Partition.total(n)}
    principals = set()
    for a, b in combinations(range(n), 2):
        principals.add(principal_congruence(algebra, a, b, clone))
    found |= principals
    frontier = set(found)
    while frontier:
        fresh = set()
        for x in frontier:
            for y in found:
                j = x.join(y)
                if j not in found and j not in fresh:
                    fresh.add(j)
        found |= fresh
        frontier = fresh
    elements = tuple(sorted(found))
    index = {c: i for i, c in enumerate(elements)}
    covers = []
    for i, lo in enumerate(elements):
        for j, hi in enumerate(elements):
            if i == j or not lo.leq(hi):
                continue
            if any(
                lo.leq(mid) and mid.leq(hi) and mid != lo and mid != hi
                for mid in elements
            ):
                continue
            covers.append((i, j))
    return CongruenceLattice(algebra, clone, elements, index, tuple(covers))


def all_congruences_bruteforce(algebra: FiniteAlgebra) -> list[Partition]:
    """Oracle: filter every partition of the universe for compatibility."""
    return [p for p in all_partitions(algebra.size) if respects(algebra, p)]


# ---------------------------------------------------------------------------
# Term-condition commutator
# ---------------------------------------------------------------------------


def _matrix_subalgebra(
    algebra: FiniteAlgebra, left: Partition, right: Partition
) -> np.ndarray:
    """Closure in A^4 of the generator matrices (a,a,b,b) for related (a,b)
    on the left and (u,v,u,v) for related (u,v) on the right; rows of every
    matrix are right-related, columns left-related."""
    n = algebra.size
    gens: set[int] = set()

    def code(x1: int, x2: int, x3: int, x4: int) -> int:
        return ((x1 * n + x2) * n + x3) * n + x4

    for block in left.blocks():
        for a in block:
            for b in block:
                gens.add(code(a, a, b, b))
    for block in right.blocks():
        for u in block:
            for v in block:
                gens.add(code(u, v, u, v))

    present = np.zeros(n**4, dtype=bool)
    codes = np.fromiter(gens, dtype=np.int64)
    present[codes] = True

    def coords(cs: np.ndarray) -> list[np.ndarray]:
        out = []
        rest = cs
        for _ in range(4):
            out.append(rest % n)
            rest = rest // n
        return out[::-1]

    tables = {op.name: np.array(op.table, dtype=np.int64) for op in algebra.ops}
    frontier = codes
    while frontier.size:
        existing = np.flatnonzero(present)
        new_mask = np.zeros(n**4, dtype=bool)
        for op in algebra.ops:
            t = tables[op.name]
            if op.arity == 0:
                v = int(t[0])
                new_mask[code(v, v, v, v)] = True
            elif op.arity == 1:
                cs = coords(frontier)
                res = sum(t[c] * n ** (3 - i) for i, c in enumerate(cs))
                new_mask[res] = True
            elif op.arity == 2:
                for xs, ys in ((frontier, existing), (existing, frontier)):
                    xc = coords(xs)
                    yc = coords(ys)
                    acc = np.zeros((xs.size, ys.size), dtype=np.int64)
                    for i in range(4):
                        acc = acc * n + t[xc[i][:, None] * n + yc[i][None, :]]
                    new_mask[acc.ravel()] = True
            else:
                # rare: recombine everything for higher arities
                cs = [coords(existing)] * op.arity
                for combo in product(range(existing.size), repeat=op.arity):
                    args = [existing[j] for j in combo]
                    cds = [coords(np.array([a]))[i][0] for a in args for i in range(4)]
                    vals = []
                    for i in range(4):
                        idx = 0
                        for j in range(op.arity):
                            idx = idx * n + cds[j * 4 + i]
                        vals.append(int(t[idx]))
                    new_mask[code(*vals)] = True
        new_mask &= ~present
        present |= new_mask
        frontier = np.flatnonzero(new_mask)
    return np.flatnonzero(present)


def commutator(
    algebra: FiniteAlgebra,
    left: Partition,
    right: Partition,
    clone: UnaryClone,
) -> Partition:
    """Term-condition commutator of two congruences.

    Least congruence d such that every matrix of the matrix subalgebra whose
    top row lies in d has its bottom row in d; computed by seeding with the
    bottom rows of matrices with equal top entries and re-closing until the
    forcing condition is stable.
    """
    n = algebra.size
    matrices = _matrix_subalgebra(algebra, left, right)
    rows = np.empty((matrices.size, 4), dtype=np.int64)
    rest = matrices.copy()
    for i in range(3, -1, -1):
        rows[:, i] = rest % n
        rest //= n

    seeds = {
        (int(r[2]), int(r[3])) for r in rows if r[0] == r[1] and r[2] != r[3]
    }
    delta = congruence_generated(algebra, seeds, clone)
    while True:
        forced = set()
        for r in rows:
            if delta.same(int(r[0]), int(r[1])) and not delta.same(int(r[2]), int(r[3])):
                forced.add((int(r[2]), int(r[3])))
        if not forced:
            return delta
        seeds |= forced
        delta = congruence_generated(algebra, seeds, clone)


def solvability_class(algebra: FiniteAlgebra, lat: CongruenceLattice,
                      alpha: Optional[Partition] = None):
    """Classify a congruence (default: the total one).

    Returns ("abelian",), ("nilpotent", k), ("solvable", k) or
    ("non-solvable",).  k counts commutator steps until zero in the lower
    central chain (nilpotent) or the derived chain (solvable).
    """
    alpha = alpha if alpha is not None else lat.one
    zero = lat.zero
    if lat.commutator(alpha, alpha) == zero:
        return ("abelian",)
    # lower central chain g_{k+1} = [g_k, alpha]
    g = alpha
    steps = 0
    seen = set()
    while g != zero and g not in seen:
        seen.add(g)
        g = lat.commutator(g, alpha)
        steps += 1
    if g == zero:
        return ("nilpotent", steps)
    d = alpha
    steps = 0
    seen = set()
    while d != zero and d not in seen:
        seen.add(d)
        d = lat.commutator(d, d)
        steps += 1
    if d == zero:
        return ("solvable", steps)
    return ("non-solvable",)


def is_nilpotent_congruence(lat: CongruenceLattice, beta: Partition) -> bool:
    zero = lat.zero
    g = beta
    seen = set()
    while g != zero and g not in seen:
        seen.add(g)
        g = lat.commutator(g, beta)
    return g == zero


# ---------------------------------------------------------------------------
# Characteristics and prime-uniform intervals
# ---------------------------------------------------------------------------


def characteristic(
    algebra: FiniteAlgebra,
    lat: CongruenceLattice,
    cover: tuple[Partition, Partition],
) -> int:
    """Prime p for a covering pair (lo, hi): in A/lo every hi-block splits
    into the same prime-power number p**k of lo-blocks.

    Requires the cover to be abelian ([hi, hi] <= lo); raises otherwise.
    """
    lo, hi = cover
    if (lo, hi) not in [
        (lat.elements[a], lat.elements[b]) for a, b in lat.covers
    ]:
        raise ValueError("not a covering pair of the lattice")
    if not lat.commutator(hi, hi).leq(lo):
        raise ValueError("cover is not abelian; characteristic undefined")
    counts = set()
    for block in hi.blocks():
        counts.add(len({lo.class_of[x] for x in block}))
    if len(counts) != 1:
        raise ValueError(f"hi-blocks split into unequal lo-block counts {counts}")
    count = counts.pop()
    p = _prime_power_base(count)
    if p is None:
        raise ValueError(f"block count {count} is not a prime power")
    return p


def _prime_power_base(m: int) -> Optional[int]:
    if m < 2:
        return None
    p = None
    for q in range(2, m + 1):
        if m % q == 0:
            p = q
            break
    while m % p == 0:
        m //= p
    return p if m == 1 else None


def prime_divisors(m: int) -> list[int]:
    out = []
    q = 2
    while q * q <= m:
        if m % q == 0:
            out.append(q)
            while m % q == 0:
                m //= q
        q += 1
    if m > 1:
        out.append(m)
    return out


def charr_set(
    algebra: FiniteAlgebra,
    lat: CongruenceLattice,
    lo: Partition,
    hi: Partition,
) -> frozenset[int]:
    """Characteristics of all covering pairs inside the interval [lo, hi]."""
    if not lo.leq(hi):
        raise ValueError("lo must lie below hi")
    return frozenset(
        lat.characteristic(a, b) for a, b in lat.cover_pairs(lo, hi)
    )


@dataclass(frozen=True)
class PupiWitness:
    parts: tuple[Partition, ...]
    characteristics: tuple[int, ...]


def is_pupi(
    algebra: FiniteAlgebra,
    lat: CongruenceLattice,
    lo: Partition,
    hi: Partition,
) -> tuple[bool, Optional[PupiWitness]]:
    """Does [lo, hi] split into independent single-characteristic pieces?

    Searches for congruences a_1..a_k strictly above lo inside the interval
    with join hi, each a_i meeting the join of the others in lo, and each
    charr{lo, a_i} a single prime.  Family size is capped by the number of
    atoms of the interval.  Returns (flag, first witness in canonical order).
    """
    if lo == hi:
        return True, PupiWitness((), ())
    interval = lat.interval(lo, hi)
    cands = []
    for c in interval:
        if c == lo:
            continue
        chars = charr_set(algebra, lat, lo, c)
        if len(chars) == 1:
            cands.append((c, next(iter(chars))))
    interval_atoms = [hi2 for lo2, hi2 in lat.cover_pairs(lo, hi) if lo2 == lo]
    max_k = max(1, len(interval_atoms))
    for k in range(1, max_k + 1):
        for combo in combinations(cands, k):
            parts = [c for c, _ in combo]
            join = lo
            for c in parts:
                join = join.join(c)
            if join != hi:
                continue
            ok = True
            for i, c in enumerate(parts):
                rest = lo
                for j, other in enumerate(parts):
                    if i != j:
                        rest = rest.join(other)
                if c.meet(rest) != lo:
                    ok = False
                    break
            if ok:
                return True, PupiWitness(
                    tuple(parts), tuple(ch for _, ch in combo)
                )
    return False, None


def interval_join_irreducibles(
    lat: CongruenceLattice, lo: Partition, hi: Partition
) -> list[Partition]:
    """Members of [lo, hi] with exactly one subcover inside the interval."""
    interval = lat.interval(lo, hi)
    out = []
    for c in interval:
        if c == lo:
            continue
        subs = [x for x in interval if x.leq(c) and x != c]
        covers = [
            x for x in subs if not any(y.leq(c) and x.leq(y) and y not in (x, c) for y in subs)
        ]
        if len(covers) == 1:
            out.append(c)
    return out


def supernilpotent_rank(
    algebra: FiniteAlgebra, lat: CongruenceLattice
) -> tuple[int, tuple[Partition, ...]]:
    """Shortest chain 0 = g_0 < ... < g_r = 1 where every step is a
    prime-uniform product interval; returns (r, chain)."""
    zero, one = lat.zero, lat.one
    if zero == one:
        return 0, (zero,)
    dist: dict[Partition, tuple[int, tuple[Partition, ...]]] = {
        zero: (0, (zero,))
    }
    frontier = [zero]
    while frontier:
        nxt = []
        for g in frontier:
            d, chain = dist[g]
            for h in lat.elements:
                if h == g or not g.leq(h) or h in dist:
                    continue
                ok, _ = is_pupi(algebra, lat, g, h)
                if ok:
                    dist[h] = (d + 1, chain + (h,))
                    if h == one:
                        return dist[h]
                    nxt.append(h)
        frontier = nxt
    raise ValueError("no chain of prime-uniform intervals reaches the top")


def is_supernilpotent_congruence(
    algebra: FiniteAlgebra, lat: CongruenceLattice, beta: Partition
) -> bool:
    """Nilpotent and [0, beta] is a prime-uniform product interval."""
    if beta == lat.zero:
        return True
    if not is_nilpotent_congruence(lat, beta):
        return False
    ok, _ = is_pupi(algebra, lat, lat.zero, beta)
    return ok


def is_supernilpotent_algebra(algebra: FiniteAlgebra,
                              lat: Optional[CongruenceLattice] = None) -> bool:
    lat = lat or all_congruences(algebra)
    return is_supernilpotent_congruence(algebra, lat, lat.one)


# ---------------------------------------------------------------------------
# Distinguished congruences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistinguishedCongruences:
    """The three landmarks of the lattice used by the compiler:

    - largest_supernilpotent: biggest congruence that is nilpotent with a
      prime-uniform interval down to zero;
    - smallest_supernilpotent_quotient: least congruence whose quotient
      algebra is supernilpotent;
    - by_prime: for each prime dividing |A|, the biggest supernilpotent
      congruence all of whose blocks have p-power size.
    """

    largest_supernilpotent: Partition
    smallest_supernilpotent_quotient: Partition
    by_prime: dict[int, Partition]


def _unique_max(cands: list[Partition], what: str) -> Partition:
    tops = [c for c in cands if all(d.leq(c) for d in cands)]
    if len(tops) != 1:
        raise ValueError(f"{what}: no unique maximum among {len(cands)} candidates")
    return tops[0]


def _unique_min(cands: list[Partition], what: str) -> Partition:
    bots = [c for c in cands if all(c.leq(d) for d in cands)]
    if len(bots) != 1:
        raise ValueError(f"{what}: no unique minimum among {len(cands)} candidates")
    return bots[0]


def distinguished_congruences(
    algebra: FiniteAlgebra, lat: CongruenceLattice
) -> DistinguishedCongruences:
    supernil = [
        c for c in lat.elements if is_supernilpotent_congruence(algebra, lat, c)
    ]
    largest = _unique_max(supernil, "largest supernilpotent congruence")

    quot_ok = []
    for c in lat.elements:
        quo, _ = lat.quotient(c)
        if is_supernilpotent_algebra(quo):
            quot_ok.append(c)
    smallest = _unique_min(quot_ok, "smallest supernilpotent quotient")

    by_prime = {}
    for p in prime_divisors(algebra.size):
        cands = [
            c
            for c in supernil
            if all(_is_power_of(len(b), p) for b in c.blocks())
        ]
        by_prime[p] = _unique_max(cands, f"largest supernilpotent for prime {p}")
    return DistinguishedCongruences(largest, smallest, by_prime)


def _is_power_of(m: int, p: int) -> bool:
    while m % p == 0:
        m //= p
    return m == 1


def sigma_for_prime(
    algebra: FiniteAlgebra, lat: CongruenceLattice, p: int
) -> Partition:
    """Biggest supernilpotent congruence with p-power block sizes (defined
    for every prime; it is the zero congruence when p does not divide |A|)."""
    cands = [
        c
        for c in lat.elements
        if is_supernilpotent_congruence(algebra, lat, c)
        and all(_is_power_of(len(b), p) for b in c.blocks())
    ]
    return _unique_max(cands, f"largest supernilpotent for prime {p}")


def supernilpotent_rank(
    algebra: FiniteAlgebra,
    lat: Optional[CongruenceLattice] = None,
) -> Optional[int]:
    """Least number of steps in a chain 0 = t_0 < ... < t_k = 1 whose every
    interval [t_i, t_{i+1}] splits into independent single-prime pieces.

    Computed as a shortest path in the congruence lattice; intervals where
    the split test is undefined (a non-abelian cover inside) are simply not
    edges.  Returns None when no such chain exists.
    """
    if lat is None:
        lat = all_congruences(algebra)
    n = len(lat.elements)
    start = lat.index(lat.zero)
    goal = lat.index(lat.one)
    if start == goal:
        return 0
    dist: dict[int, int] = {start: 0}
    frontier = [start]
    while frontier:
        nxt: list[int] = []
        for i in frontier:
            lo = lat.elements[i]
            for j in range(n):
                if j in dist or i == j:
                    continue
                hi = lat.elements[j]
                if not lo.leq(hi):
                    continue
                try:
                    ok, _ = is_pupi(algebra, lat, lo, hi)
                except ValueError:
                    ok = False
                if ok:
                    dist[j] = dist[i] + 1
                    if j == goal:
                        return dist[j]
                    nxt.append(j)
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# Product decompositions into prime-power factors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """A direct decomposition A ~ prod A/eta_j into prime-power factors.

    ``primes[j]`` is the prime of factor j, ``projections[j]`` the universe
    map of the quotient, and ``iso`` the verified product bijection sending
    each element to its tuple of factor classes.
    """

    algebra: FiniteAlgebra
    kernels: tuple[Partition, ...]
    factors: tuple[FiniteAlgebra, ...]
    projections: tuple[tuple[int, ...], ...]
    primes: tuple[int, ...]
    iso: tuple[tuple[int, ...], ...]


def prime_power_decomposition(
    algebra: FiniteAlgebra, lat: CongruenceLattice
) -> Decomposition:
    """Split A into factors of prime-power size via complementary congruences.

    For each prime p dividing |A| the kernel must have quotient of p-power
    size and blocks of size coprime to p; the family must meet to zero so
    that the joint projection is a bijection (verified).
    """
    n = algebra.size
    primes = prime_divisors(n)
    if len(primes) == 1:
        kernels = (lat.zero,)
        quo, mapping = lat.quotient(lat.zero)
        return Decomposition(
            algebra,
            kernels,
            (quo,),
            (mapping,),
            (primes[0],),
            tuple((mapping[x],) for x in range(n)),
        )
    ppart = {p: 1 for p in primes}
    for p in primes:
        m = n
        while m % p == 0:
            ppart[p] *= p
            m //= p
    cand_lists = []
    for p in primes:
        cands = [
            c
            for c in lat.elements
            if c.num_blocks() == ppart[p]
            and all(len(b) == n // ppart[p] for b in c.blocks())
        ]
        if not cands:
            raise ValueError(f"no factor kernel candidate for prime {p}")
        cand_lists.append(cands)
    for family in product(*cand_lists):
        meet = family[0]
        for c in family[1:]:
            meet = meet.meet(c)
        if not meet.is_identity():
            continue
        tuples = [tuple(c.class_of[x] for c in family) for x in range(n)]
        if len(set(tuples)) != n:
            continue
        quos = [lat.quotient(c) for c in family]
        iso = tuple(
            tuple(quos[j][1][x] for j in range(len(family))) for x in range(n)
        )
        return Decomposition(
            algebra,
            tuple(family),
            tuple(q for q, _ in quos),
            tuple(m for _, m in quos),
            tuple(primes),
            iso,
        )
    raise ValueError("no complementary family of prime-power kernels found")


def pdiv(algebra: FiniteAlgebra) -> int:
    """Product of the distinct primes dividing |A|."""
    out = 1
    for p in prime_divisors(algebra.size):
        out *= p
    return out
