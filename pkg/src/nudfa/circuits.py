"""Circuits over the signature of a finite algebra.

A circuit is a DAG of nodes: variables, constants, and gates labelled with a
basic operation name.  Nodes are stored in a topologically ordered tuple and
are hash-consed at construction time, so structurally equal subterms share a
node.  Circuits stand in for terms-with-constants (polynomials) everywhere in
the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

VAR = "var"
CONST = "const"
GATE = "gate"


class OpTable(Protocol):
    """Anything that can evaluate a named basic operation (see algebra.py)."""

    def eval_op(self, name: str, args: Sequence[int]) -> int: ...

    def op_arity(self, name: str) -> int: ...


@dataclass(frozen=True)
class AlgCircuit:
    """DAG over k variables; nodes are ("var", i), ("const", a) or
    ("gate", op_name, (child_ids...)) in topological order."""

    k: int
    nodes: tuple[tuple, ...]
    output: int

    def __post_init__(self) -> None:
        for idx, node in enumerate(self.nodes):
            tag = node[0]
            if tag == VAR:
                if not 0 <= node[1] < self.k:
                    raise ValueError(f"variable index out of range: {node}")
            elif tag == CONST:
                pass
            elif tag == GATE:
                if any(c >= idx or c < 0 for c in node[2]):
                    raise ValueError(f"node {idx} not topologically ordered")
            else:
                raise ValueError(f"unknown node tag {tag!r}")
        if not 0 <= self.output < len(self.nodes):
            raise ValueError("output id out of range")

    @property
    def gate_count(self) -> int:
        return sum(1 for n in self.nodes if n[0] == GATE)

    def depth(self) -> int:
        d = [0] * len(self.nodes)
        for idx, node in enumerate(self.nodes):
            if node[0] == GATE:
                d[idx] = 1 + max((d[c] for c in node[2]), default=0)
        return d[self.output]

    def validate_ops(self, algebra: OpTable) -> None:
        for node in self.nodes:
            if node[0] == GATE:
                want = algebra.op_arity(node[1])
                if want != len(node[2]):
                    raise ValueError(
                        f"gate {node[1]} expects {want} children, got {len(node[2])}"
                    )

    def to_json(self) -> dict:
        nodes = []
        for node in self.nodes:
            if node[0] == GATE:
                nodes.append([GATE, node[1], list(node[2])])
            else:
                nodes.append(list(node))
        return {"k": self.k, "nodes": nodes, "output": self.output}

    @staticmethod
    def from_json(data: dict) -> "AlgCircuit":
        nodes = []
        for raw in data["nodes"]:
            if raw[0] == GATE:
                nodes.append((GATE, raw[1], tuple(raw[2])))
            elif raw[0] == VAR:
                nodes.append((VAR, int(raw[1])))
            elif raw[0] == CONST:
                nodes.append((CONST, int(raw[1])))
            else:
                raise ValueError(f"bad node {raw!r}")
        return AlgCircuit(int(data["k"]), tuple(nodes), int(data["output"]))


def eval_circuit(algebra: OpTable, circuit: AlgCircuit, args: Sequence[int]) -> int:
    """Evaluate bottom-up; args supplies the k variable values."""
    if len(args) != circuit.k:
        raise ValueError(f"expected {circuit.k} arguments, got {len(args)}")
    vals = [0] * len(circuit.nodes)
    for idx, node in enumerate(circuit.nodes):
        tag = node[0]
        if tag == VAR:
            vals[idx] = args[node[1]]
        elif tag == CONST:
            vals[idx] = node[1]
        else:
            vals[idx] = algebra.eval_op(node[1], [vals[c] for c in node[2]])
    return vals[circuit.output]


class CircuitBuilder:
    """Incremental hash-consed construction of an AlgCircuit."""

    def __init__(self, k: int):
        self.k = k
        self._nodes: list[tuple] = []
        self._memo: dict[tuple, int] = {}

    def _intern(self, node: tuple) -> int:
        idx = self._memo.get(node)
        if idx is None:
            idx = len(self._nodes)
            self._nodes.append(node)
            self._memo[node] = idx
        return idx

    def var(self, i: int) -> int:
        if not 0 <= i < self.k:
            raise ValueError(f"variable {i} out of range")
        return self._intern((VAR, i))

    def const(self, a: int) -> int:
        return self._intern((CONST, a))

    def gate(self, op: str, *children: int) -> int:
        for c in children:
            if not 0 <= c < len(self._nodes):
                raise ValueError(f"unknown child id {c}")
        return self._intern((GATE, op, tuple(children)))

    def inline(self, circuit: AlgCircuit, var_map: Sequence[int]) -> int:
        """Copy ``circuit`` into this builder, replacing its variable i by the
        existing node ``var_map[i]``; returns the id of the copied output."""
        if len(var_map) != circuit.k:
            raise ValueError("var_map length must match circuit.k")
        ids: list[int] = []
        for node in circuit.nodes:
            tag = node[0]
            if tag == VAR:
                ids.append(var_map[node[1]])
            elif tag == CONST:
                ids.append(self.const(node[1]))
            else:
                ids.append(self.gate(node[1], *(ids[c] for c in node[2])))
        return ids[circuit.output]

    def finish(self, output: int) -> AlgCircuit:
        keep = _reachable(self._nodes, output)
        remap: dict[int, int] = {}
        nodes: list[tuple] = []
        for idx in keep:
            node = self._nodes[idx]
            if node[0] == GATE:
                node = (GATE, node[1], tuple(remap[c] for c in node[2]))
            remap[idx] = len(nodes)
            nodes.append(node)
        return AlgCircuit(self.k, tuple(nodes), remap[output])


def _reachable(nodes: list[tuple], root: int) -> list[int]:
    seen: set[int] = set()
    stack = [root]
    while stack:
        idx = stack.pop()
        if idx in seen:
            continue
        seen.add(idx)
        node = nodes[idx]
        if node[0] == GATE:
            stack.extend(node[2])
    return sorted(seen)


def variable_circuit(k: int, i: int) -> AlgCircuit:
    b = CircuitBuilder(k)
    return b.finish(b.var(i))


def constant_circuit(k: int, a: int) -> AlgCircuit:
    b = CircuitBuilder(k)
    return b.finish(b.const(a))


def compose(outer: AlgCircuit, inners: Sequence[AlgCircuit], k: int) -> AlgCircuit:
    """outer(inner_1(x), ..., inner_j(x)) over a common variable space of size k."""
    if len(inners) != outer.k:
        raise ValueError("need one inner circuit per outer variable")
    b = CircuitBuilder(k)
    roots = [b.inline(c, [b.var(i) for i in range(k)]) for c in inners]
    return b.finish(b.inline(outer, roots))
