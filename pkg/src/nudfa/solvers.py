"""Decision procedures for programs and equations over finite algebras.

Two kinds of questions are answered here.  Program satisfiability: does a
program accept any input word?  Circuit equations: is t(x) = e solvable
(CSat), or does it hold identically (CEqv)?  Each question has a direct
exhaustive procedure, and the equation problems additionally reduce to
program satisfiability through a value-selector polynomial built from a
ternary difference circuit.  A quotient-lifting reduction and a
subdirect-decomposition strategy for identities round out the toolbox.

Every positive answer carries a witness that has been re-verified by
direct evaluation; negative answers from the random sampler are explicitly
tagged probabilistic.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .algebra import FiniteAlgebra, verify_malcev
from .circuits import AlgCircuit, CircuitBuilder, eval_circuit
from .compile import HypothesisViolation
from .congruence import (
    CongruenceLattice,
    all_congruences,
    is_nilpotent_congruence,
)
from .limits import Budget, charge, default_budget
from .programs import AlgProgram, Instruction, map_circuit_constants


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a decision procedure.

    ``status`` is one of "sat", "unsat", "unsat (probabilistic)", "holds",
    "fails".  Satisfying words / solutions land in ``witness``, failing
    assignments in ``counterexample``; both are re-verified before being
    returned.  ``tried`` counts evaluated inputs, ``elapsed`` is wall-clock
    seconds, ``seed`` is set by the random sampler only.
    """

    status: str
    witness: Optional[tuple[int, ...]] = None
    counterexample: Optional[tuple[int, ...]] = None
    tried: int = 0
    elapsed: float = 0.0
    seed: Optional[int] = None

    @property
    def decided(self) -> bool:
        return self.status in ("sat", "unsat", "holds", "fails")


# ---------------------------------------------------------------------------
# Program satisfiability
# ---------------------------------------------------------------------------


def progcsat_exhaustive(
    program: AlgProgram, budget: Optional[Budget] = None
) -> SolveResult:
    """Scan all words in index order; first accepted word wins."""
    budget = budget or default_budget()
    n = program.n
    charge(1 << n, 1 << budget.progcsat_bits, "program input words")
    start = time.perf_counter()
    for word in range(1 << n):
        bits = tuple((word >> i) & 1 for i in range(n))
        if program.accepts(bits):
            return SolveResult(
                status="sat",
                witness=bits,
                tried=word + 1,
                elapsed=time.perf_counter() - start,
            )
    return SolveResult(
        status="unsat", tried=1 << n, elapsed=time.perf_counter() - start
    )


def progcsat_sample(
    program: AlgProgram,
    trials: Optional[int] = None,
    seed: int = 0,
) -> SolveResult:
    """Random search for an accepted word; a miss is only probabilistic."""
    if trials is None:
        trials = 4 * program.size**2
    rng = random.Random(seed)
    n = program.n
    start = time.perf_counter()
    for t in range(trials):
        word = rng.getrandbits(n) if n else 0
        bits = tuple((word >> i) & 1 for i in range(n))
        if program.accepts(bits):
            return SolveResult(
                status="sat",
                witness=bits,
                tried=t + 1,
                elapsed=time.perf_counter() - start,
                seed=seed,
            )
    return SolveResult(
        status="unsat (probabilistic)",
        tried=trials,
        elapsed=time.perf_counter() - start,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Equations: direct procedures
# ---------------------------------------------------------------------------


def csat_exhaustive(
    algebra: FiniteAlgebra,
    circuit: AlgCircuit,
    e: int,
    budget: Optional[Budget] = None,
) -> SolveResult:
    """Is t(x) = e solvable?  Scans the full assignment space."""
    budget = budget or default_budget()
    charge(algebra.size**circuit.k, budget.domain_scan, "assignment scan")
    start = time.perf_counter()
    tried = 0
    for args in product(range(algebra.size), repeat=circuit.k):
        tried += 1
        if eval_circuit(algebra, circuit, args) == e:
            return SolveResult(
                status="sat",
                witness=args,
                tried=tried,
                elapsed=time.perf_counter() - start,
            )
    return SolveResult(
        status="unsat", tried=tried, elapsed=time.perf_counter() - start
    )


def ceqv_exhaustive(
    algebra: FiniteAlgebra,
    circuit: AlgCircuit,
    e: int,
    budget: Optional[Budget] = None,
) -> SolveResult:
    """Does t(x) = e hold for every assignment?"""
    budget = budget or default_budget()
    charge(algebra.size**circuit.k, budget.domain_scan, "assignment scan")
    start = time.perf_counter()
    tried = 0
    for args in product(range(algebra.size), repeat=circuit.k):
        tried += 1
        if eval_circuit(algebra, circuit, args) != e:
            return SolveResult(
                status="fails",
                counterexample=args,
                tried=tried,
                elapsed=time.perf_counter() - start,
            )
    return SolveResult(
        status="holds", tried=tried, elapsed=time.perf_counter() - start
    )


def _require_nilpotent_malcev(
    algebra: FiniteAlgebra,
    malcev: AlgCircuit,
    lat: Optional[CongruenceLattice] = None,
) -> None:
    """Both preconditions of the equation reductions, reported separately.

    The selector argument below needs the difference identities, and the
    two-sided-to-one-sided fold needs first-argument invertibility of the
    difference, which nilpotence supplies.
    """
    if not verify_malcev(algebra, malcev):
        raise HypothesisViolation(
            "the supplied circuit fails the difference identities"
        )
    if lat is None:
        lat = all_congruences(algebra)
    if not is_nilpotent_congruence(lat, lat.one):
        raise HypothesisViolation("the algebra is not nilpotent")


def normalize_equation(
    algebra: FiniteAlgebra,
    malcev: AlgCircuit,
    left: AlgCircuit,
    right: AlgCircuit,
    e: int = 0,
    lat: Optional[CongruenceLattice] = None,
) -> AlgCircuit:
    """Fold the two-sided equation left = right into d(left, right, e) = e.

    Left-to-right solvability transfers both ways whenever the difference
    circuit is invertible in its first argument (true in nilpotent
    algebras); one direction (left = right implies value e) always holds.
    """
    _require_nilpotent_malcev(algebra, malcev, lat)
    k = max(left.k, right.k)
    b = CircuitBuilder(k)
    vars_ = [b.var(i) for i in range(k)]
    lnode = b.inline(left, vars_[: left.k])
    rnode = b.inline(right, vars_[: right.k])
    out = b.inline(malcev, [lnode, rnode, b.const(e)])
    return b.finish(out)


# ---------------------------------------------------------------------------
# Equations -> programs
# ---------------------------------------------------------------------------


def _value_selector(algebra: FiniteAlgebra, malcev: AlgCircuit) -> AlgCircuit:
    """(size-1)-ary circuit f with f(0,..,0)=0 and f(0,..,a,..,0)=a.

    Chains the difference circuit: f(x1,..,xk) = d(..d(d(x1,0,x2),0,x3)..).
    Fed with each argument either 0 or its designated nonzero element, a
    single active argument selects exactly that element.
    """
    k = algebra.size - 1
    b = CircuitBuilder(k)
    zero = b.const(0)
    acc = b.var(0)
    for i in range(1, k):
        acc = b.inline(malcev, [acc, zero, b.var(i)])
    return b.finish(acc)


def csat_to_progcsat(
    algebra: FiniteAlgebra,
    malcev: AlgCircuit,
    circuit: AlgCircuit,
    e: int,
    lat: Optional[CongruenceLattice] = None,
) -> AlgProgram:
    """Program that accepts some word iff t(x) = e has a solution.

    Each circuit variable is replaced by a value selector over size-1 fresh
    program variables; bit (i, j) switches variable i's candidate j between
    the zero element and the nonzero element j+1.  Every assignment over the
    algebra is reachable by activating at most one bit per block, and every
    word produces some assignment, so acceptance is exactly solvability.
    """
    _require_nilpotent_malcev(algebra, malcev, lat)
    size = algebra.size
    if size < 2:
        raise ValueError("need at least two elements")
    k = size - 1
    selector = _value_selector(algebra, malcev)
    b = CircuitBuilder(circuit.k * k)
    selected = []
    for i in range(circuit.k):
        selected.append(b.inline(selector, [b.var(i * k + j) for j in range(k)]))
    out = b.inline(circuit, selected)
    prog_circuit = b.finish(out)
    instrs = tuple(
        Instruction(var=i * k + j, bit=i * k + j, a0=0, a1=j + 1)
        for i in range(circuit.k)
        for j in range(k)
    )
    return AlgProgram(
        algebra=algebra,
        circuit=prog_circuit,
        n=circuit.k * k,
        instructions=instrs,
        accepting=frozenset({e}),
    )


def ceqv_to_progcsat(
    algebra: FiniteAlgebra,
    malcev: AlgCircuit,
    circuit: AlgCircuit,
    e: int,
    lat: Optional[CongruenceLattice] = None,
) -> AlgProgram:
    """Program that accepts no word iff t(x) = e holds identically.

    Same selector construction as the solvability reduction, but accepting
    exactly the non-e values: an accepted word is a counterexample."""
    prog = csat_to_progcsat(algebra, malcev, circuit, e, lat)
    complement = frozenset(range(algebra.size)) - {e}
    return AlgProgram(
        algebra=prog.algebra,
        circuit=prog.circuit,
        n=prog.n,
        instructions=prog.instructions,
        accepting=complement,
    )


# ---------------------------------------------------------------------------
# Structural reductions
# ---------------------------------------------------------------------------


def ceqv_via_meet_irreducibles(
    algebra: FiniteAlgebra,
    circuit: AlgCircuit,
    e: int,
    lat: Optional[CongruenceLattice] = None,
    budget: Optional[Budget] = None,
) -> SolveResult:
    """Check t(x) = e in every subdirectly irreducible quotient instead.

    An identity holds iff it holds modulo every meet-irreducible
    congruence.  A failure in a quotient is pulled back along least class
    representatives and re-verified in the original algebra.
    """
    budget = budget or default_budget()
    if lat is None:
        lat = all_congruences(algebra, budget=budget)
    start = time.perf_counter()
    tried = 0
    for theta in lat.meet_irreducibles():
        quo, mapping = lat.quotient(theta)
        charge(quo.size**circuit.k, budget.domain_scan, "quotient scan")
        mapped = map_circuit_constants(circuit, mapping)
        target = mapping[e]
        reps = {}
        for x in range(algebra.size):
            reps.setdefault(mapping[x], x)
        for args in product(range(quo.size), repeat=circuit.k):
            tried += 1
            if eval_circuit(quo, mapped, args) != target:
                lifted = tuple(reps[a] for a in args)
                got = eval_circuit(algebra, circuit, lifted)
                assert got != e, "pulled-back counterexample evaporated"
                return SolveResult(
                    status="fails",
                    counterexample=lifted,
                    tried=tried,
                    elapsed=time.perf_counter() - start,
                )
    return SolveResult(
        status="holds", tried=tried, elapsed=time.perf_counter() - start
    )


def quotient_reduce_progcsat(
    program: AlgProgram,
    algebra: FiniteAlgebra,
    mapping: Sequence[int],
) -> AlgProgram:
    """Lift a program over a quotient back to the full algebra.

    ``mapping`` sends each element of ``algebra`` to its class in the
    program's algebra (verified to be a surjective homomorphism).  Circuit
    constants and instruction values are replaced by least representatives
    and the accepting set by the union of its classes, so the accepted
    language is unchanged.
    """
    quo = program.algebra
    if len(mapping) != algebra.size or set(mapping) != set(range(quo.size)):
        raise ValueError("mapping is not onto the program's algebra")
    for op in algebra.ops:
        quo.op(op.name)  # raises if the quotient lacks the operation
        for args in product(range(algebra.size), repeat=op.arity):
            down = tuple(mapping[a] for a in args)
            if mapping[algebra.eval_op(op.name, args)] != quo.eval_op(
                op.name, down
            ):
                raise ValueError(f"mapping fails to commute with {op.name}")
    reps: dict[int, int] = {}
    for x in range(algebra.size):
        reps.setdefault(mapping[x], x)
    rep_table = [reps[c] for c in range(quo.size)]
    circuit = map_circuit_constants(program.circuit, rep_table)
    instrs = tuple(
        Instruction(var=ins.var, bit=ins.bit, a0=rep_table[ins.a0], a1=rep_table[ins.a1])
        for ins in program.instructions
    )
    accepting = frozenset(
        x for x in range(algebra.size) if mapping[x] in program.accepting
    )
    return AlgProgram(
        algebra=algebra,
        circuit=circuit,
        n=program.n,
        instructions=instrs,
        accepting=accepting,
    )
