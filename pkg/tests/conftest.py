"""Shared helpers: random generators and suite-wide timing.

The acceptance module's wall-clock criterion must observe the whole
session, so collection is reordered to run it last.
"""

from __future__ import annotations

import random
import time

import pytest

from nudfa.circuits import AlgCircuit, CircuitBuilder
from nudfa.programs import AlgProgram, Instruction

SESSION_START = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    tail = [it for it in items if "wall_clock" in it.name]
    rest = [it for it in items if "wall_clock" not in it.name]
    items[:] = rest + tail


def scalar(value):
    """Open scalar SUMP outputs come back as 1-vectors; unwrap them."""
    if isinstance(value, tuple) and len(value) == 1:
        return value[0]
    return value


def random_alg_circuit(
    rng: random.Random, algebra, k: int, max_gates: int
) -> AlgCircuit:
    """Random circuit over the algebra's operations with k variables."""
    b = CircuitBuilder(k)
    pool = [b.var(i) for i in range(k)]
    if rng.random() < 0.5:
        pool.append(b.const(rng.randrange(algebra.size)))
    for _ in range(rng.randrange(1, max_gates + 1)):
        op = rng.choice(algebra.ops)
        pool.append(b.gate(op.name, *(rng.choice(pool) for _ in range(op.arity))))
    return b.finish(pool[-1])


def random_program(
    rng: random.Random, algebra, n: int, max_gates: int
) -> AlgProgram:
    """Random program: random circuit, random bit wiring, random accepting."""
    circ = random_alg_circuit(rng, algebra, rng.randrange(1, 4), max_gates)
    instrs = tuple(
        Instruction(
            var=i,
            bit=rng.randrange(n),
            a0=rng.randrange(algebra.size),
            a1=rng.randrange(algebra.size),
        )
        for i in range(circ.k)
    )
    accepting = frozenset(
        x for x in range(algebra.size) if rng.random() < 0.4
    )
    return AlgProgram(
        algebra=algebra,
        circuit=circ,
        n=n,
        instructions=instrs,
        accepting=accepting,
    )


@pytest.fixture(scope="session")
def session_start() -> float:
    return SESSION_START
