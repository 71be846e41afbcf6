"""Nonuniform programs over a finite algebra.

A program reads an n-bit word through instructions: variable v of the
underlying circuit is bound to one of two algebra elements depending on a
single input bit.  The program accepts when the circuit value lands in the
accepting set.  Programs are the bridge between boolean computation and
algebra-valued circuits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .algebra import FiniteAlgebra, quotient_algebra
from .circuits import AlgCircuit, CircuitBuilder, eval_circuit, CONST, GATE, VAR
from .congruence import Decomposition
from .limits import Budget, default_budget
from .partitions import Partition


@dataclass(frozen=True)
class Instruction:
    """Bind a circuit variable: bit b false -> a0, true -> a1."""

    var: int
    bit: int
    a0: int
    a1: int

    def value(self, word: Sequence[int]) -> int:
        return self.a1 if word[self.bit] else self.a0


@dataclass(frozen=True)
class AlgProgram:
    algebra: FiniteAlgebra
    circuit: AlgCircuit
    n: int  # number of input bits
    instructions: tuple[Instruction, ...]
    accepting: frozenset[int]

    def __post_init__(self) -> None:
        seen = set()
        for ins in self.instructions:
            if not 0 <= ins.var < self.circuit.k:
                raise ValueError(f"instruction for unknown variable {ins.var}")
            if ins.var in seen:
                raise ValueError(f"two instructions for variable {ins.var}")
            if not 0 <= ins.bit < self.n:
                raise ValueError(f"bit index {ins.bit} out of range")
            seen.add(ins.var)
        if seen != set(range(self.circuit.k)):
            raise ValueError("every circuit variable needs exactly one instruction")
        for a in self.accepting:
            if not 0 <= a < self.algebra.size:
                raise ValueError("accepting element out of universe")

    @property
    def size(self) -> int:
        """Gate count plus instruction count."""
        return self.circuit.gate_count + len(self.instructions)

    def inner_value(self, word: Sequence[int]) -> int:
        args = [0] * self.circuit.k
        for ins in self.instructions:
            args[ins.var] = ins.value(word)
        return eval_circuit(self.algebra, self.circuit, args)

    def accepts(self, word: Sequence[int]) -> bool:
        return self.inner_value(word) in self.accepting

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "algebra": self.algebra.to_json(),
            "circuit": self.circuit.to_json(),
            "n": self.n,
            "instructions": [
                {"var": i.var, "bit": i.bit, "a0": i.a0, "a1": i.a1}
                for i in self.instructions
            ],
            "accepting": sorted(self.accepting),
        }

    @staticmethod
    def from_json(data: dict, algebra: Optional[FiniteAlgebra] = None) -> "AlgProgram":
        if algebra is None:
            algebra = FiniteAlgebra.from_json(data["algebra"])
        return AlgProgram(
            algebra,
            AlgCircuit.from_json(data["circuit"]),
            int(data["n"]),
            tuple(
                Instruction(
                    int(i["var"]), int(i["bit"]), int(i["a0"]), int(i["a1"])
                )
                for i in data["instructions"]
            ),
            frozenset(int(a) for a in data["accepting"]),
        )

    @staticmethod
    def load(path: str, algebra: Optional[FiniteAlgebra] = None) -> "AlgProgram":
        with open(path) as fh:
            return AlgProgram.from_json(json.load(fh), algebra)

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def truth_table(program: AlgProgram, budget: Optional[Budget] = None) -> list[bool]:
    """Acceptance on every word; row index encodes the word with bit 0 least
    significant."""
    budget = budget or default_budget()
    if program.n > budget.truth_table_bits:
        raise ValueError(
            f"{program.n} input bits exceed truth-table bound "
            f"{budget.truth_table_bits}"
        )
    out = []
    for row in range(1 << program.n):
        word = [(row >> i) & 1 for i in range(program.n)]
        out.append(program.accepts(word))
    return out


def inner_value_table(program: AlgProgram,
                      budget: Optional[Budget] = None) -> list[int]:
    """Circuit value (not just acceptance) on every word."""
    budget = budget or default_budget()
    if program.n > budget.truth_table_bits:
        raise ValueError("too many input bits")
    out = []
    for row in range(1 << program.n):
        word = [(row >> i) & 1 for i in range(program.n)]
        out.append(program.inner_value(word))
    return out


def map_circuit_constants(circuit: AlgCircuit, mapping: Sequence[int]) -> AlgCircuit:
    """Rewrite every constant node through an element mapping (same shape)."""
    nodes = []
    for node in circuit.nodes:
        if node[0] == CONST:
            nodes.append((CONST, mapping[node[1]]))
        else:
            nodes.append(node)
    return AlgCircuit(circuit.k, tuple(nodes), circuit.output)


def quotient_program(
    program: AlgProgram, part: Partition
) -> tuple[AlgProgram, tuple[int, ...]]:
    """Reinterpret a program over A/part (same circuit shape; instruction
    constants and accepting set map to block indices).  Returns the program
    together with the projection."""
    quo, mapping = quotient_algebra(program.algebra, part)
    return (
        AlgProgram(
            quo,
            map_circuit_constants(program.circuit, mapping),
            program.n,
            tuple(
                Instruction(i.var, i.bit, mapping[i.a0], mapping[i.a1])
                for i in program.instructions
            ),
            frozenset(mapping[a] for a in program.accepting),
        ),
        mapping,
    )


def with_accepting(program: AlgProgram, accepting) -> AlgProgram:
    return AlgProgram(
        program.algebra,
        program.circuit,
        program.n,
        program.instructions,
        frozenset(accepting),
    )


def subprogram(program: AlgProgram, node: int) -> AlgProgram:
    """The program computing the value of one circuit node (same word space,
    acceptance untouched: caller sets it)."""
    b = CircuitBuilder(program.circuit.k)
    ids = []
    for nd in program.circuit.nodes:
        if nd[0] == VAR:
            ids.append(b.var(nd[1]))
        elif nd[0] == CONST:
            ids.append(b.const(nd[1]))
        else:
            ids.append(b.gate(nd[1], *(ids[c] for c in nd[2])))
    cut = b.finish(ids[node])
    used = sorted({nd[1] for nd in cut.nodes if nd[0] == VAR})
    remap = {v: i for i, v in enumerate(used)}
    shrunk = AlgCircuit(
        len(used),
        tuple(
            (VAR, remap[nd[1]]) if nd[0] == VAR else nd for nd in cut.nodes
        ),
        cut.output,
    )
    instructions = tuple(
        Instruction(remap[i.var], i.bit, i.a0, i.a1)
        for i in program.instructions
        if i.var in remap
    )
    return AlgProgram(
        program.algebra, shrunk, program.n, instructions, program.accepting
    )


@dataclass(frozen=True)
class ProgramFactor:
    program: AlgProgram
    prime: int
    projection: tuple[int, ...]


def decompose_program(
    program: AlgProgram, dec: Decomposition, target: int
) -> list[ProgramFactor]:
    """Split acceptance of a single target element across the prime-power
    factors of a decomposition: the word is accepted with value == target
    iff every factor program accepts."""
    out = []
    for kernel, prime, projection in zip(dec.kernels, dec.primes, dec.projections):
        quo, mapping = quotient_program(program, kernel)
        assert mapping == projection
        out.append(
            ProgramFactor(
                with_accepting(quo, {projection[target]}), prime, projection
            )
        )
    return out
