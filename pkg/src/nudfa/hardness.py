"""Reduction gadgets that turn CNF formulas into algebra programs.

Three constructions live here:

* ``cnf_to_lattice_program`` rewrites a 3-CNF as a monotone circuit program
  over the two-element lattice: each boolean variable feeds two program
  variables of opposite polarity, so the circuit itself needs no negation.

* ``beta_interpolate`` realises arbitrary two-letter patterns as algebra
  circuits, working modulo a congruence.  The setting is a chain of three
  congruences whose two covering steps have distinct prime characteristics:
  inputs range over a pair separated only by the top step, outputs over a
  pair separated only by the bottom step.  A ``BetaIntConfig`` carries the
  discovered unary polynomials (projection into a minimal set, the shifted
  -sum seed ``h``, the class indicator ``b`` and a permutability corrector)
  that make the construction go through; ``complete_interpolation_config``
  searches for them and validates every required condition.

* ``find_two_prime_witness`` / ``build_two_prime_program`` assemble, on an
  algebra whose congruence lattice exhibits two distinct primes below the
  co-supernilpotent congruence, a program that accepts a bit string iff it
  satisfies a given 3-CNF.  Satisfiability is detected by a pair of
  divisibility polynomials over the two primes; a counting argument makes
  simultaneous vanishing equivalent to "zero unsatisfied clauses".

All discovered artifacts are circuits with evaluation-verified semantics:
``beta_interpolate`` checks its output exhaustively on the input cube, and
``build_two_prime_program`` replays the full truth table against direct
formula evaluation whenever the variable count allows it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence, Union

from .algebra import (
    FiniteAlgebra,
    UnaryClone,
    UnaryFn,
    find_malcev_polynomial,
    verify_malcev,
)
from .circuits import AlgCircuit, CircuitBuilder, constant_circuit, eval_circuit
from .congruence import (
    CongruenceLattice,
    all_congruences,
    charr_set,
    distinguished_congruences,
    is_nilpotent_congruence,
    supernilpotent_rank,
)
from .fieldpoly import Cnf3, coset_indicator_form, flat_index, pseudo_and
from .fixtures import get_fixture
from .limits import Budget, BudgetExceeded, default_budget
from .localize import MinimalSet, minimal_set_through, minimal_sets
from .partitions import Partition
from .programs import AlgProgram, Instruction

MAX_INTERPOLATION_ARITY = 6


class GadgetSearchError(Exception):
    """A component search failed; ``stage`` names the first missing piece."""

    def __init__(self, stage: str, detail: str):
        super().__init__(f"[{stage}] {detail}")
        self.stage = stage
        self.detail = detail


# ---------------------------------------------------------------------------
# CNF -> program over the two-element lattice
# ---------------------------------------------------------------------------


def cnf_satisfied(cnf: Cnf3, bits: Sequence[int]) -> bool:
    """Evaluate the formula directly on a 0/1 word (bit i = variable i+1)."""
    for clause in cnf.clauses:
        if not any(
            (bits[lit - 1] if lit > 0 else 1 - bits[-lit - 1]) for lit in clause
        ):
            return False
    return True


def cnf_to_lattice_program(cnf: Cnf3) -> AlgProgram:
    """Program over ({0,1}; and, or) accepting exactly the satisfying words.

    Boolean variable i drives two program variables: one bound (bit -> bit)
    and one bound with flipped polarity, so negative literals become plain
    variables and the circuit stays monotone.
    """
    lattice = get_fixture("LAT2").algebra
    n = cnf.num_vars
    b = CircuitBuilder(2 * n)

    def literal(lit: int) -> int:
        if lit > 0:
            return b.var(lit - 1)
        return b.var(n + (-lit) - 1)

    clause_nodes = []
    for clause in cnf.clauses:
        node = literal(clause[0])
        for lit in clause[1:]:
            node = b.gate("or", node, literal(lit))
        clause_nodes.append(node)
    if clause_nodes:
        out = clause_nodes[0]
        for node in clause_nodes[1:]:
            out = b.gate("and", out, node)
    else:
        out = b.const(1)
    circ = b.finish(out)
    instrs = []
    for i in range(n):
        instrs.append(Instruction(var=i, bit=i, a0=0, a1=1))
        instrs.append(Instruction(var=n + i, bit=i, a0=1, a1=0))
    return AlgProgram(
        algebra=lattice,
        circuit=circ,
        n=n,
        instructions=tuple(instrs),
        accepting=frozenset({1}),
    )


# ---------------------------------------------------------------------------
# Interpolation across a three-congruence chain
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class BetaIntConfig:
    """Validated data for interpolating two-letter patterns modulo ``lower``.

    The chain ``lower < mid < upper`` consists of two covering steps with
    distinct prime characteristics: ``in_char`` for (mid, upper) governs the
    input side, ``out_char`` for (lower, mid) the output side.  Inputs are
    words over {in_zero, in_one} (a pair inside upper but outside mid),
    outputs land in {base, mark} (a pair inside mid but outside lower) up to
    the congruence ``lower``.

    ``g_fn`` projects the input pair into the minimal set ``in_min`` whose
    trace carries modular arithmetic; ``cycle`` lists the in_char orbit
    points of that trace.  ``h_fn`` is the unary polynomial whose shifted
    sums produce the class indicator ``b_fn`` with peak value ``anchor``,
    and ``fix_fn`` moves the anchor's class onto ``mark``'s class while
    fixing ``base``.  ``h_adjusted`` records whether the fallback shift of
    ``h_fn`` was needed to make the orbit sum leave ``base``'s class.
    """

    algebra: FiniteAlgebra
    lat: CongruenceLattice
    clone: UnaryClone
    malcev: AlgCircuit
    lower: Partition
    mid: Partition
    upper: Partition
    in_zero: int
    in_one: int
    base: int
    mark: int
    in_char: int
    out_char: int
    in_min: MinimalSet
    out_min: MinimalSet
    g_fn: UnaryFn
    cycle: tuple[int, ...]
    h_fn: UnaryFn
    h_adjusted: bool
    anchor: int
    b_fn: UnaryFn
    fix_fn: UnaryFn


def _wrapped_add(
    algebra: FiniteAlgebra, malcev: AlgCircuit, wrap: UnaryFn, zero: int
) -> tuple[tuple[int, ...], ...]:
    """Cayley table of x (+) y = wrap(d(x, zero, y))."""
    n = algebra.size
    return tuple(
        tuple(
            wrap.values[eval_circuit(algebra, malcev, (x, zero, y))]
            for y in range(n)
        )
        for x in range(n)
    )


def complete_interpolation_config(
    algebra: FiniteAlgebra,
    malcev: AlgCircuit,
    lower: Partition,
    mid: Partition,
    upper: Partition,
    *,
    lat: Optional[CongruenceLattice] = None,
    clone: Optional[UnaryClone] = None,
    in_pair: Optional[tuple[int, int]] = None,
    base: Optional[int] = None,
    mark: Optional[int] = None,
    budget: Optional[Budget] = None,
) -> BetaIntConfig:
    """Discover and validate all interpolation data for a congruence chain.

    Searches run in canonical order (clone functions sorted by value table,
    elements ascending), so results are deterministic.  Raises
    ``GadgetSearchError`` naming the first step that cannot be completed.
    """
    budget = budget or default_budget()
    if lat is None:
        lat = all_congruences(algebra, budget=budget)
    if clone is None:
        clone = UnaryClone(algebra, budget)
    size = algebra.size
    if not verify_malcev(algebra, malcev):
        raise GadgetSearchError("malcev", "supplied circuit fails the difference identities")
    if lat.subcovers_of(upper) != [mid]:
        raise GadgetSearchError(
            "chain", "the top congruence must have the middle one as its only subcover"
        )
    if lower not in lat.subcovers_of(mid):
        raise GadgetSearchError("chain", "the bottom pair must be a covering pair")
    try:
        in_char = lat.characteristic(mid, upper)
        out_char = lat.characteristic(lower, mid)
    except ValueError as ex:
        raise GadgetSearchError("characteristic", str(ex)) from None
    if in_char == out_char:
        raise GadgetSearchError(
            "characteristic", "the two covering characteristics must differ"
        )

    if in_pair is None:
        in_pair = next(
            (
                (x, y)
                for x in range(size)
                for y in range(size)
                if x != y and upper.same(x, y) and not mid.same(x, y)
            ),
            None,
        )
        if in_pair is None:
            raise GadgetSearchError("input-pair", "no pair separates the covers")
    in_zero, in_one = in_pair
    if not (upper.same(in_zero, in_one) and not mid.same(in_zero, in_one)):
        raise GadgetSearchError(
            "input-pair", "the input pair must lie inside the top cover only"
        )

    # Project the input pair into a minimal set of the upper covering step.
    found = None
    for ms in minimal_sets(algebra, clone, mid, upper):
        if ms.idempotent is None:
            continue
        retract = ms.idempotent
        seen: set[tuple[int, ...]] = set()
        for fn in clone:
            tab = tuple(retract.values[v] for v in fn.values)
            if tab in seen:
                continue
            seen.add(tab)
            gx, gy = tab[in_zero], tab[in_one]
            if upper.same(gx, gy) and not mid.same(gx, gy):
                g_fn = clone.lookup(tab)
                if g_fn is not None:
                    found = (ms, g_fn)
                    break
        if found:
            break
    if found is None:
        raise GadgetSearchError(
            "in-set",
            "no unary polynomial projects the input pair into a minimal set "
            "of the upper covering step",
        )
    in_min, g_fn = found
    c0, c1 = g_fn.values[in_zero], g_fn.values[in_one]

    in_add = _wrapped_add(algebra, malcev, in_min.idempotent, c0)
    cycle = [c0]
    cur = c0
    for _ in range(in_char - 1):
        cur = in_add[cur][c1]
        cycle.append(cur)
    if any(c not in in_min.universe for c in cycle):
        raise GadgetSearchError("cycle", "orbit leaves the minimal set")
    if len({mid.class_of[c] for c in cycle}) != in_char:
        raise GadgetSearchError(
            "cycle", "orbit points do not represent distinct middle classes"
        )
    if mid.class_of[in_add[cycle[-1]][c1]] != mid.class_of[c0]:
        raise GadgetSearchError("cycle", "orbit does not close up after one period")

    def attempt(e: int, want_mark: Optional[int]) -> BetaIntConfig:
        out_min = minimal_set_through(algebra, clone, lat, lower, mid, e)
        if out_min is None or out_min.idempotent is None:
            raise GadgetSearchError(
                "out-set",
                f"no minimal set with an idempotent range passes through element {e}",
            )
        retract = out_min.idempotent
        out_add = _wrapped_add(algebra, malcev, retract, e)
        trace = [x for x in sorted(out_min.universe) if mid.same(x, e)]
        for x in trace:
            if not lower.same(out_add[e][x], x) or not lower.same(out_add[x][e], x):
                raise GadgetSearchError(
                    "out-group", "the base element is not a unit on the trace"
                )
            acc = x
            for _ in range(out_char - 1):
                acc = out_add[acc][x]
            if not lower.same(acc, e):
                raise GadgetSearchError(
                    "out-group",
                    f"trace element {x} lacks additive order dividing {out_char}",
                )
        neg = []
        for x in range(size):
            acc = x
            for _ in range(out_char - 2):
                acc = out_add[acc][x]
            neg.append(acc if out_char > 1 else x)

        if want_mark is None:
            cands = [x for x in trace if not lower.same(x, e)]
            if not cands:
                raise GadgetSearchError(
                    "mark", "the trace modulo the bottom congruence is trivial"
                )
            a = cands[0]
        else:
            a = want_mark
            if a not in trace or lower.same(a, e):
                raise GadgetSearchError(
                    "mark", "requested output letter is not a nontrivial trace element"
                )

        universe_in = sorted(in_min.universe)

        def bullets_ok(tab: Sequence[int]) -> bool:
            if not lower.same(tab[c0], e):
                return False
            if not mid.same(tab[c0], tab[c1]) or lower.same(tab[c0], tab[c1]):
                return False
            for x in range(size):
                for y in range(x + 1, size):
                    if upper.same(x, y) and not mid.same(tab[x], tab[y]):
                        return False
            for xi, x in enumerate(universe_in):
                for y in universe_in[xi + 1 :]:
                    if mid.same(x, y) and not lower.same(tab[x], tab[y]):
                        return False
            return True

        def orbit_sum(tab: Sequence[int]) -> int:
            acc = tab[cycle[0]]
            for j in range(1, in_char):
                acc = out_add[acc][tab[cycle[j]]]
            return acc

        xor_c1 = [in_add[x][c1] for x in range(size)]

        chosen = None
        for h0 in clone:
            tab = tuple(retract.values[v] for v in h0.values)
            if not bullets_ok(tab):
                continue
            total = orbit_sum(tab)
            if not lower.same(total, e):
                chosen = (tab, False, total)
                break
            # Shift the argument by one orbit step and re-center; the new
            # orbit sum must differ from the old one by the full-period
            # multiple of the shift value, which we assert.
            shifted = tuple(
                out_add[tab[xor_c1[x]]][neg[tab[c1]]] for x in range(size)
            )
            qfold = tab[c1]
            for _ in range(in_char - 1):
                qfold = out_add[qfold][tab[c1]]
            total2 = orbit_sum(shifted)
            expect = out_add[total][neg[qfold]]
            if not lower.same(total2, expect):
                raise AssertionError(
                    "shifted orbit sum violates the re-centering identity"
                )
            if bullets_ok(shifted) and not lower.same(total2, e):
                chosen = (shifted, True, total2)
                break
        if chosen is None:
            raise GadgetSearchError(
                "indicator-seed",
                "no unary polynomial satisfies the shifted-sum conditions",
            )
        h_tab, h_adjusted, anchor = chosen
        h_fn = clone.lookup(h_tab)
        if h_fn is None:
            raise AssertionError("composed seed table escaped the unary clone")

        b_tab = []
        for z in range(size):
            acc = None
            for j in range(in_char):
                if j == 0:
                    jz = c0
                else:
                    jz = z
                    for _ in range(j - 1):
                        jz = in_add[jz][z]
                val = h_tab[jz]
                acc = val if acc is None else out_add[acc][val]
            b_tab.append(out_add[anchor][neg[acc]])
        b_fn = clone.lookup(tuple(b_tab))
        if b_fn is None:
            raise AssertionError("class-indicator table escaped the unary clone")
        for j, cj in enumerate(cycle):
            want = anchor if j == 0 else e
            if not lower.same(b_tab[cj], want):
                raise GadgetSearchError(
                    "indicator", f"indicator misfires at orbit point {j}"
                )

        fix_fn = clone.find(
            lambda t: t.values[e] == e and lower.same(t.values[anchor], a)
        )
        if fix_fn is None:
            raise GadgetSearchError(
                "permutability-fix",
                "no unary polynomial moves the anchor class onto the mark "
                "while fixing the base",
            )

        return BetaIntConfig(
            algebra=algebra,
            lat=lat,
            clone=clone,
            malcev=malcev,
            lower=lower,
            mid=mid,
            upper=upper,
            in_zero=in_zero,
            in_one=in_one,
            base=e,
            mark=a,
            in_char=in_char,
            out_char=out_char,
            in_min=in_min,
            out_min=out_min,
            g_fn=g_fn,
            cycle=tuple(cycle),
            h_fn=h_fn,
            h_adjusted=h_adjusted,
            anchor=anchor,
            b_fn=b_fn,
            fix_fn=fix_fn,
        )

    if base is not None:
        return attempt(base, mark)
    first_err: Optional[GadgetSearchError] = None
    for e in range(size):
        try:
            return attempt(e, mark)
        except GadgetSearchError as ex:
            if first_err is None:
                first_err = ex
    raise first_err or GadgetSearchError("out-set", "no base element works")


def find_interpolation_configs(
    algebra: FiniteAlgebra,
    malcev: Optional[AlgCircuit] = None,
    lat: Optional[CongruenceLattice] = None,
    clone: Optional[UnaryClone] = None,
    budget: Optional[Budget] = None,
) -> tuple[list[BetaIntConfig], list[str]]:
    """All congruence chains of an algebra that admit interpolation data.

    Returns the validated configurations together with a per-chain log of
    outcomes (validated, or the first failing search stage).
    """
    budget = budget or default_budget()
    if lat is None:
        lat = all_congruences(algebra, budget=budget)
    if malcev is None:
        malcev = find_malcev_polynomial(algebra, budget=budget)
    if malcev is None:
        return [], ["no ternary difference polynomial: interpolation needs permutability"]
    if clone is None:
        clone = UnaryClone(algebra, budget)
    configs: list[BetaIntConfig] = []
    notes: list[str] = []
    for upper in lat.elements:
        subs = lat.subcovers_of(upper)
        if len(subs) != 1:
            continue
        mid = subs[0]
        for lower in lat.subcovers_of(mid):
            label = (
                f"chain {lat.index(lower)} < {lat.index(mid)} < {lat.index(upper)}"
            )
            try:
                cfg = complete_interpolation_config(
                    algebra,
                    malcev,
                    lower,
                    mid,
                    upper,
                    lat=lat,
                    clone=clone,
                    budget=budget,
                )
            except GadgetSearchError as ex:
                notes.append(f"{label}: failed at {ex}")
                continue
            configs.append(cfg)
            notes.append(f"{label}: validated")
    return configs, notes


def beta_interpolate(
    cfg: BetaIntConfig, f: Sequence[int], budget: Optional[Budget] = None
) -> AlgCircuit:
    """Circuit matching a two-letter pattern modulo ``cfg.lower``.

    ``f`` is a flat table of length 2**s over the letters {base, mark},
    indexed with the first input most significant (bit 0 = in_zero, 1 =
    in_one).  The returned s-ary circuit c satisfies c(x) = f(x) modulo the
    bottom congruence for every x in {in_zero, in_one}^s — checked
    exhaustively before returning.
    """
    budget = budget or default_budget()
    size = len(f)
    s = size.bit_length() - 1
    if 1 << s != size:
        raise ValueError("table length must be a power of two")
    if s > MAX_INTERPOLATION_ARITY:
        raise ValueError(f"interpolation arity {s} above bound {MAX_INTERPOLATION_ARITY}")
    for v in f:
        if v not in (cfg.base, cfg.mark):
            raise ValueError("table values must be the two output letters")
    if s == 0:
        return constant_circuit(0, f[0])

    q, p = cfg.in_char, cfg.out_char
    table = [0] * (q**s)
    for bits in product(range(2), repeat=s):
        if f[flat_index(bits, 2)] == cfg.mark:
            table[flat_index(bits, q)] = 1
    form = coset_indicator_form(table, q, s, p, budget)

    b = CircuitBuilder(s)
    czero = b.const(cfg.cycle[0])
    bzero = b.const(cfg.base)

    def xor(u: int, v: int) -> int:
        return b.inline(
            cfg.in_min.idempotent.witness,
            [b.inline(cfg.malcev, [u, czero, v])],
        )

    def vadd(u: int, v: int) -> int:
        return b.inline(
            cfg.out_min.idempotent.witness,
            [b.inline(cfg.malcev, [u, bzero, v])],
        )

    ys = [b.inline(cfg.g_fn.witness, [b.var(i)]) for i in range(s)]

    def multiple(node: int, j: int) -> int:
        if j == 0:
            return czero
        acc = node
        for _ in range(j - 1):
            acc = xor(acc, node)
        return acc

    total = None
    for (coeffs, u), mu in sorted(form.terms.items()):
        comb = None
        for i, coef in enumerate(coeffs):
            if coef % q == 0:
                continue
            mnode = multiple(ys[i], coef % q)
            comb = mnode if comb is None else xor(comb, mnode)
        cu = b.const(cfg.cycle[u % q])
        comb = cu if comb is None else xor(comb, cu)
        bnode = b.inline(cfg.b_fn.witness, [comb])
        term = bnode
        for _ in range(mu % p - 1):
            term = vadd(term, bnode)
        total = term if total is None else vadd(total, term)
    if total is None:
        total = bzero
    out = b.inline(cfg.fix_fn.witness, [total])
    circ = b.finish(out)

    for bits in product(range(2), repeat=s):
        args = [cfg.in_one if t else cfg.in_zero for t in bits]
        got = eval_circuit(cfg.algebra, circ, args)
        want = f[flat_index(bits, 2)]
        if not cfg.lower.same(got, want):
            raise AssertionError(
                f"interpolated circuit disagrees with the table at {bits}: "
                f"got {got}, want {want}"
            )
    return circ


# ---------------------------------------------------------------------------
# Two-prime witness and program assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessFailure:
    """Why the two-prime search stopped: the first unmatchable fact."""

    stage: str
    detail: str


@dataclass(eq=False)
class PrimeSideWitness:
    """One prime's half of the two-prime configuration.

    ``atom`` sits below the co-supernilpotent congruence with characteristic
    ``q`` (the summation prime for this side).  ``avoid`` is a maximal
    congruence above the atom avoiding the co-supernilpotent congruence;
    its unique cover ``avoid_cover`` starts a covering step to ``step``
    whose characteristic ``p`` differs from q.  ``peak`` is a minimal
    congruence under ``step`` escaping ``avoid_cover``; the chain
    (floor, peak_sub, peak) = (avoid∧peak, peak's unique subcover, peak)
    carries the interpolation ``config`` with input pair (in_zero, in_one),
    output pair (base of the witness, mark) inside the minimal set
    ``out_set``.
    """

    atom: Partition
    q: int
    avoid: Partition
    avoid_cover: Partition
    step: Partition
    p: int
    peak: Partition
    peak_sub: Partition
    floor: Partition
    out_set: MinimalSet
    in_zero: int
    in_one: int
    mark: int
    config: BetaIntConfig


@dataclass(eq=False)
class TwoPrimeWitness:
    """Full validated configuration for the two-prime program assembly."""

    algebra: FiniteAlgebra
    lat: CongruenceLattice
    clone: UnaryClone
    malcev: AlgCircuit
    kappa: Partition
    base: int
    sides: tuple[PrimeSideWitness, PrimeSideWitness]


def find_two_prime_witness(
    algebra: FiniteAlgebra,
    malcev: Optional[AlgCircuit] = None,
    lat: Optional[CongruenceLattice] = None,
    clone: Optional[UnaryClone] = None,
    budget: Optional[Budget] = None,
) -> Union[TwoPrimeWitness, WitnessFailure]:
    """Search the congruence lattice for the two-prime configuration.

    Scans in canonical order and returns either a fully validated witness
    or a ``WitnessFailure`` naming the first fact that cannot be matched.
    """
    budget = budget or default_budget()
    if lat is None:
        lat = all_congruences(algebra, budget=budget)
    if not is_nilpotent_congruence(lat, lat.one):
        return WitnessFailure("nilpotent", f"{algebra.name} is not nilpotent")
    rank = supernilpotent_rank(algebra, lat)
    if rank != 2:
        return WitnessFailure(
            "supernilpotent-rank", f"sr={rank}, the construction needs rank exactly 2"
        )
    if malcev is None:
        malcev = find_malcev_polynomial(algebra, budget=budget)
    if malcev is None:
        return WitnessFailure("malcev", "no ternary difference polynomial found")
    if clone is None:
        clone = UnaryClone(algebra, budget)

    kappa = distinguished_congruences(algebra, lat).smallest_supernilpotent_quotient
    prized = []
    for gamma in lat.subcovers_of(kappa):
        try:
            prized.append((gamma, lat.characteristic(gamma, kappa)))
        except ValueError:
            continue
    primes = sorted({q for _, q in prized})
    if len(primes) < 2:
        return WitnessFailure(
            "two-primes-below",
            f"the co-supernilpotent congruence has "
            f"{len(lat.subcovers_of(kappa))} subcover(s) with characteristic "
            f"set {primes}; two distinct primes are required",
        )
    gamma0, q0 = prized[0]
    gamma1, q1 = next((g, q) for g, q in prized if q != q0)
    if gamma0.meet(gamma1) != lat.zero:
        return WitnessFailure(
            "atom-meet", "the two chosen subcovers must meet in the zero congruence"
        )
    for gamma in (gamma0, gamma1):
        if lat.subcovers_of(gamma) != [lat.zero]:
            return WitnessFailure(
                "atoms",
                "subcovers of the co-supernilpotent congruence must be atoms",
            )

    size = algebra.size
    raw_sides = []
    for idx, (gamma, q, other_gamma) in enumerate(
        ((gamma0, q0, gamma1), (gamma1, q1, gamma0))
    ):
        tag = f"side {idx}"
        dom = [t for t in lat.elements if gamma.leq(t) and not kappa.leq(t)]
        maximal = [t for t in dom if not any(t.leq(u) and t != u for u in dom)]
        if not maximal:
            return WitnessFailure("avoid", f"{tag}: no congruence dominates the atom "
                                           "while avoiding the co-supernilpotent one")
        phi = maximal[0]
        covers = lat.covers_of(phi)
        if len(covers) != 1:
            return WitnessFailure(
                "meet-irreducible", f"{tag}: the avoiding congruence has {len(covers)} covers"
            )
        phi_plus = covers[0]
        if not kappa.leq(phi_plus):
            return WitnessFailure(
                "avoid-cover", f"{tag}: the unique cover does not dominate the "
                               "co-supernilpotent congruence"
            )
        try:
            if lat.characteristic(phi, phi_plus) != q:
                return WitnessFailure(
                    "avoid-characteristic",
                    f"{tag}: the avoiding cover's characteristic differs from {q}",
                )
        except ValueError:
            return WitnessFailure(
                "avoid-characteristic", f"{tag}: the avoiding cover is not abelian"
            )
        step = p = None
        for cand in lat.covers_of(phi_plus):
            try:
                ch = lat.characteristic(phi_plus, cand)
            except ValueError:
                continue
            if ch != q:
                step, p = cand, ch
                break
        if step is None:
            return WitnessFailure(
                "cross-prime-step",
                f"{tag}: no covering step above carries a prime other than {q}",
            )
        below = [t for t in lat.elements if t.leq(step) and not t.leq(phi_plus)]
        minimal = [t for t in below if not any(u.leq(t) and u != t for u in below)]
        peak = minimal[0]
        psubs = lat.subcovers_of(peak)
        if len(psubs) != 1:
            return WitnessFailure(
                "join-irreducible", f"{tag}: the minimal escaping congruence has "
                                    f"{len(psubs)} subcovers"
            )
        peak_sub = psubs[0]
        floor = phi.meet(peak)
        if floor not in lat.subcovers_of(peak_sub) or peak_sub not in lat.subcovers_of(peak):
            return WitnessFailure(
                "projected-chain", f"{tag}: floor, subcover and peak do not form "
                                   "a two-step covering chain"
            )
        try:
            if (
                lat.characteristic(floor, peak_sub) != q
                or lat.characteristic(peak_sub, peak) != p
            ):
                return WitnessFailure(
                    "projected-characteristics",
                    f"{tag}: projected chain characteristics are not ({q}, {p})",
                )
        except ValueError:
            return WitnessFailure(
                "projected-characteristics", f"{tag}: projected chain has a "
                                             "non-abelian cover"
            )
        case_atom = floor == lat.zero and peak_sub == other_gamma
        case_above = gamma.leq(floor) and kappa.leq(peak_sub)
        if not (case_atom or case_above):
            return WitnessFailure(
                "atom-or-above",
                f"{tag}: the floor/subcover pair matches neither allowed shape",
            )
        if other_gamma.join(floor) != peak_sub or other_gamma.meet(floor) != lat.zero:
            return WitnessFailure(
                "lower-transposition",
                f"{tag}: the other atom does not transpose onto the floor interval",
            )
        if peak_sub.join(phi) != phi_plus or peak_sub.meet(phi) != floor:
            return WitnessFailure(
                "upper-transposition",
                f"{tag}: the subcover does not transpose onto the avoiding interval",
            )
        if gamma.leq(floor) and gamma != floor:
            if q in charr_set(algebra, lat, gamma, floor):
                return WitnessFailure(
                    "prime-separation",
                    f"{tag}: prime {q} reappears between the atom and the floor",
                )
        pair = next(
            (
                (x, y)
                for x in range(size)
                for y in range(size)
                if x != y and peak.same(x, y) and not peak_sub.same(x, y)
            ),
            None,
        )
        if pair is None:
            return WitnessFailure("input-pair", f"{tag}: no separating pair")
        raw_sides.append(
            dict(
                atom=gamma,
                q=q,
                other=other_gamma,
                avoid=phi,
                avoid_cover=phi_plus,
                step=step,
                p=p,
                peak=peak,
                peak_sub=peak_sub,
                floor=floor,
                pair=pair,
            )
        )

    def assemble(e: int) -> Union[TwoPrimeWitness, WitnessFailure]:
        vsets = []
        for idx, raw in enumerate(raw_sides):
            vset = minimal_set_through(
                algebra, clone, lat, raw["floor"], raw["peak_sub"], e
            )
            if vset is None or vset.idempotent is None:
                return WitnessFailure(
                    "out-set",
                    f"side {idx}: no minimal set with an idempotent range "
                    f"through element {e}",
                )
            vsets.append(vset)
        if vsets[0].universe & vsets[1].universe != {e}:
            return WitnessFailure(
                "disjoint-ranges",
                f"the two minimal sets through {e} overlap beyond the base",
            )
        for idx, (raw, vset) in enumerate(zip(raw_sides, vsets)):
            members = sorted(vset.universe)
            for xi, x in enumerate(members):
                for y in members[xi + 1 :]:
                    if raw["peak_sub"].same(x, y) and not raw["other"].same(x, y):
                        return WitnessFailure(
                            "range-collapse",
                            f"side {idx}: subcover classes inside the minimal "
                            "set are not controlled by the other atom",
                        )
                    if raw["floor"].same(x, y):
                        return WitnessFailure(
                            "range-separation",
                            f"side {idx}: the floor congruence is not trivial "
                            "on the minimal set",
                        )
        sides = []
        for idx, (raw, vset) in enumerate(zip(raw_sides, vsets)):
            trace = [x for x in sorted(vset.universe) if raw["peak_sub"].same(x, e)]
            marks = [x for x in trace if x != e]
            if not marks:
                return WitnessFailure(
                    "mark", f"side {idx}: the trace through the base is trivial"
                )
            mark = marks[0]
            c, d = raw["pair"]
            try:
                cfg = complete_interpolation_config(
                    algebra,
                    malcev,
                    raw["floor"],
                    raw["peak_sub"],
                    raw["peak"],
                    lat=lat,
                    clone=clone,
                    in_pair=(c, d),
                    base=e,
                    mark=mark,
                    budget=budget,
                )
            except GadgetSearchError as ex:
                return WitnessFailure(f"interpolation-side{idx}", str(ex))
            sides.append(
                PrimeSideWitness(
                    atom=raw["atom"],
                    q=raw["q"],
                    avoid=raw["avoid"],
                    avoid_cover=raw["avoid_cover"],
                    step=raw["step"],
                    p=raw["p"],
                    peak=raw["peak"],
                    peak_sub=raw["peak_sub"],
                    floor=raw["floor"],
                    out_set=vset,
                    in_zero=c,
                    in_one=d,
                    mark=mark,
                    config=cfg,
                )
            )
        return TwoPrimeWitness(
            algebra=algebra,
            lat=lat,
            clone=clone,
            malcev=malcev,
            kappa=kappa,
            base=e,
            sides=(sides[0], sides[1]),
        )

    first_fail: Optional[WitnessFailure] = None
    for e in range(size):
        res = assemble(e)
        if isinstance(res, TwoPrimeWitness):
            return res
        if first_fail is None:
            first_fail = res
    return first_fail


def build_two_prime_program(
    algebra: FiniteAlgebra,
    witness: TwoPrimeWitness,
    cnf: Cnf3,
    budget: Optional[Budget] = None,
) -> AlgProgram:
    """Program accepting exactly the satisfying assignments of the formula.

    Each side i turns the formula into a divisibility polynomial over its
    prime q_i (modulus chosen so the two prime powers multiply out beyond
    the clause count), interpolates its monomials as algebra circuits and
    sums them inside the trace group of the side's minimal set.  The two
    side values are combined with the difference polynomial; since the two
    minimal sets meet only in the base element, the combination equals the
    base exactly when both sides vanish — which by a counting argument
    means no clause is unsatisfied.  The full truth table is replayed
    against direct formula evaluation whenever the formula has at most 10
    variables.
    """
    budget = budget or default_budget()
    n = cnf.num_vars
    ell = len(cnf.clauses)
    b = CircuitBuilder(2 * n)
    e = witness.base
    enode = b.const(e)
    side_nodes = []
    for i, side in enumerate(witness.sides):
        cfg = side.config
        q = side.q
        nu = 1
        while q ** (2 * nu) <= ell:
            nu += 1
        poly = pseudo_and(cnf, q, nu, budget)

        retract = cfg.out_min.idempotent.witness

        def vadd(u: int, v: int) -> int:
            return b.inline(retract, [b.inline(cfg.malcev, [u, enode, v])])

        pattern_cache: dict[int, AlgCircuit] = {}
        total = None
        for key in sorted(poly.terms, key=lambda k: (len(k), sorted(k))):
            lam = poly.terms[key] % q
            if lam == 0:
                continue
            if len(key) > MAX_INTERPOLATION_ARITY:
                raise BudgetExceeded(
                    f"monomial support {len(key)} exceeds the interpolation "
                    f"arity bound {MAX_INTERPOLATION_ARITY}"
                )
            if key:
                support = sorted(key)
                s = len(support)
                circ = pattern_cache.get(s)
                if circ is None:
                    table = [cfg.base] * (1 << s)
                    table[(1 << s) - 1] = cfg.mark
                    circ = beta_interpolate(cfg, table, budget)
                    pattern_cache[s] = circ
                node = b.inline(circ, [b.var(i * n + j) for j in support])
                node = b.inline(retract, [node])
            else:
                node = b.const(cfg.mark)
            term = node
            for _ in range(lam - 1):
                term = vadd(term, node)
            total = term if total is None else vadd(total, term)
        if total is None:
            total = enode
        side_nodes.append(total)
    out = b.inline(witness.malcev, [side_nodes[0], side_nodes[1], enode])
    circ = b.finish(out)
    instrs = []
    for i, side in enumerate(witness.sides):
        for j in range(n):
            instrs.append(
                Instruction(var=i * n + j, bit=j, a0=side.in_zero, a1=side.in_one)
            )
    program = AlgProgram(
        algebra=algebra,
        circuit=circ,
        n=n,
        instructions=tuple(instrs),
        accepting=frozenset({e}),
    )
    if n <= 10:
        for word in range(1 << n):
            bits = tuple((word >> t) & 1 for t in range(n))
            if program.accepts(bits) != cnf_satisfied(cnf, bits):
                raise AssertionError(
                    f"two-prime program disagrees with the formula at {bits}"
                )
    return program
