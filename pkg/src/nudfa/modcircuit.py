"""Layered circuits of modular-counting gates over boolean inputs.

Gate kinds:

- ``AND`` / ``OR``: plain boolean gates (empty AND is 1, empty OR is 0);
- ``MOD``: sums its inputs with wire multiplicities modulo m and outputs 1
  iff the sum lies in the accepting set;
- ``SUMP``: an affine map into Z_p^nu; each boolean input b is read as the
  constant vector (b, ..., b) and hit with a nu-by-nu matrix coefficient;
  the output is the vector (so a SUMP may only sit at the output);
- ``SUMPC``: same sum, but outputs the boolean test "vector == target".

Nodes are numbered with the n inputs first (0..n-1) and gates following in
topological order.  Every gate carries a 1-based layer index; a circuit is
shape-valid when gate kinds match the declared layer descriptors and every
wire runs from layer i to layer i+1 (inputs forming layer 0).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional, Sequence

AND = "AND"
OR = "OR"
MOD = "MOD"
SUMP = "SUMP"
SUMPC = "SUMPC"

Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Gate:
    kind: str
    layer: int
    wires: tuple[tuple[int, int], ...]  # (source node id, multiplicity)
    m: int = 0                      # MOD modulus
    accepting: frozenset[int] = frozenset()
    p: int = 0                      # SUMP/SUMPC prime
    nu: int = 0
    coeffs: tuple[Matrix, ...] = ()  # one matrix per wire
    offset: tuple[int, ...] = ()
    target: tuple[int, ...] = ()     # SUMPC only

    def __post_init__(self) -> None:
        if self.kind not in (AND, OR, MOD, SUMP, SUMPC):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if any(mult < 1 for _, mult in self.wires):
            raise ValueError("wire multiplicities must be >= 1")
        if self.kind == MOD:
            if self.m < 1:
                raise ValueError("MOD gate needs a positive modulus")
            if any(not 0 <= a < self.m for a in self.accepting):
                raise ValueError("accepting residue out of range")
        if self.kind in (SUMP, SUMPC):
            if self.p < 2 or self.nu < 1:
                raise ValueError("SUMP gate needs a prime p and nu >= 1")
            if len(self.coeffs) != len(self.wires):
                raise ValueError("one coefficient matrix per wire")
            for mat in self.coeffs:
                if len(mat) != self.nu or any(len(r) != self.nu for r in mat):
                    raise ValueError("coefficient matrix has wrong shape")
            if len(self.offset) != self.nu:
                raise ValueError("offset has wrong length")
        if self.kind == SUMPC and len(self.target) != self.nu:
            raise ValueError("target has wrong length")

    @property
    def fan_in(self) -> int:
        return sum(mult for _, mult in self.wires)


@dataclass(frozen=True)
class CCircuit:
    inputs: int
    gates: tuple[Gate, ...]
    output: int  # node id (inputs count first)
    declared_shape: str

    def __post_init__(self) -> None:
        for gid, gate in enumerate(self.gates):
            node = self.inputs + gid
            for src, _ in gate.wires:
                if not 0 <= src < node:
                    raise ValueError(
                        f"gate {node}: wire from {src} breaks topological order"
                    )
        if not 0 <= self.output < self.inputs + len(self.gates):
            raise ValueError("output id out of range")

    def gate_of(self, node: int) -> Gate:
        return self.gates[node - self.inputs]

    @property
    def size(self) -> int:
        """Gate count plus total wire multiplicity."""
        return len(self.gates) + sum(g.fan_in for g in self.gates)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        gates = []
        for g in self.gates:
            item: dict = {
                "kind": g.kind,
                "layer": g.layer,
                "wires": [[s, m] for s, m in g.wires],
            }
            if g.kind == MOD:
                item["m"] = g.m
                item["accepting"] = sorted(g.accepting)
            elif g.kind in (SUMP, SUMPC):
                item["p"] = g.p
                item["nu"] = g.nu
                item["coeffs"] = [[list(r) for r in mat] for mat in g.coeffs]
                item["offset"] = list(g.offset)
                if g.kind == SUMPC:
                    item["target"] = list(g.target)
            gates.append(item)
        return {
            "inputs": self.inputs,
            "shape": self.declared_shape,
            "gates": gates,
            "output": self.output,
        }

    @staticmethod
    def from_json(data: dict) -> "CCircuit":
        gates = []
        for item in data["gates"]:
            kind = item["kind"]
            gates.append(
                Gate(
                    kind,
                    int(item["layer"]),
                    tuple((int(s), int(m)) for s, m in item["wires"]),
                    m=int(item.get("m", 0)),
                    accepting=frozenset(int(a) for a in item.get("accepting", [])),
                    p=int(item.get("p", 0)),
                    nu=int(item.get("nu", 0)),
                    coeffs=tuple(
                        tuple(tuple(int(v) for v in row) for row in mat)
                        for mat in item.get("coeffs", [])
                    ),
                    offset=tuple(int(v) for v in item.get("offset", [])),
                    target=tuple(int(v) for v in item.get("target", [])),
                )
            )
        return CCircuit(
            int(data["inputs"]),
            tuple(gates),
            int(data["output"]),
            str(data["shape"]),
        )

    @staticmethod
    def load(path: str) -> "CCircuit":
        with open(path) as fh:
            return CCircuit.from_json(json.load(fh))

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_cc(circuit: CCircuit, word: Sequence[int]):
    """Evaluate on an n-bit word.  Returns 0/1, or a tuple for an open
    vector-valued output gate."""
    if len(word) != circuit.inputs:
        raise ValueError(f"expected {circuit.inputs} bits")
    vals: list = [1 if b else 0 for b in word]
    for gate in circuit.gates:
        srcs = []
        for s, mult in gate.wires:
            v = vals[s]
            if isinstance(v, tuple):
                raise ValueError("vector-valued gate feeds another gate")
            srcs.append((v, mult))
        if gate.kind == AND:
            out = 1 if all(v for v, _ in srcs) else 0
        elif gate.kind == OR:
            out = 1 if any(v for v, _ in srcs) else 0
        elif gate.kind == MOD:
            total = sum(v * mult for v, mult in srcs) % gate.m
            out = 1 if total in gate.accepting else 0
        else:
            acc = list(gate.offset)
            for (v, mult), mat in zip(srcs, gate.coeffs):
                if v:
                    for j in range(gate.nu):
                        acc[j] += mult * sum(mat[j])
            vec = tuple(a % gate.p for a in acc)
            if gate.kind == SUMP:
                out = vec
            else:
                want = tuple(t % gate.p for t in gate.target)
                out = 1 if vec == want else 0
        vals.append(out)
    return vals[circuit.output]


def cc_truth_table(circuit: CCircuit) -> list:
    out = []
    for row in range(1 << circuit.inputs):
        word = [(row >> i) & 1 for i in range(circuit.inputs)]
        out.append(eval_cc(circuit, word))
    return out


# ---------------------------------------------------------------------------
# Layer shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    param: Optional[int]  # None = wildcard

    def __str__(self) -> str:
        if self.param is None:
            return f"{self.kind}(*)"
        return f"{self.kind}({self.param})"


_LAYER_RE = re.compile(r"^([A-Z]+)(?:\((\*|\d+)\))?$")


def parse_shape(text: str) -> tuple[LayerSpec, ...]:
    """Parse "AND(3)∘MOD(6)∘MOD(5)"-style descriptors, input layer first."""
    out = []
    for chunk in text.replace(".", "∘").split("∘"):
        m = _LAYER_RE.match(chunk.strip())
        if not m:
            raise ValueError(f"bad layer descriptor {chunk!r}")
        kind, param = m.group(1), m.group(2)
        if kind not in (AND, OR, MOD, SUMP, SUMPC):
            raise ValueError(f"unknown gate kind {kind!r}")
        out.append(LayerSpec(kind, None if param in (None, "*") else int(param)))
    return tuple(out)


def format_shape(layers: Sequence[LayerSpec]) -> str:
    return "∘".join(str(l) for l in layers)


def validate_shape(
    circuit: CCircuit, shape: Optional[str] = None
) -> tuple[bool, list[str]]:
    """Check the layered discipline against a shape descriptor.

    Every gate must sit in a declared layer with matching kind and parameter
    (AND/OR parameters bound fan-in; MOD parameters fix the modulus;
    SUMP/SUMPC parameters fix the prime), every wire must go from layer i to
    layer i+1 with inputs at layer 0, the output must be in the last layer,
    and vector-valued gates may only drive the output.
    """
    layers = parse_shape(shape if shape is not None else circuit.declared_shape)
    errors = []
    depth = len(layers)
    for gid, gate in enumerate(circuit.gates):
        node = circuit.inputs + gid
        if not 1 <= gate.layer <= depth:
            errors.append(f"gate {node}: layer {gate.layer} outside shape")
            continue
        spec = layers[gate.layer - 1]
        if gate.kind != spec.kind:
            errors.append(
                f"gate {node}: kind {gate.kind} in a {spec.kind} layer"
            )
        if spec.param is not None:
            if gate.kind in (AND, OR) and gate.fan_in > spec.param:
                errors.append(
                    f"gate {node}: fan-in {gate.fan_in} exceeds {spec.param}"
                )
            if gate.kind == MOD and gate.m != spec.param:
                errors.append(f"gate {node}: modulus {gate.m} != {spec.param}")
            if gate.kind in (SUMP, SUMPC) and gate.p != spec.param:
                errors.append(f"gate {node}: prime {gate.p} != {spec.param}")
        for src, _ in gate.wires:
            src_layer = 0 if src < circuit.inputs else circuit.gates[src - circuit.inputs].layer
            if src_layer != gate.layer - 1:
                errors.append(
                    f"gate {node} (layer {gate.layer}): wire from layer {src_layer}"
                )
        if gate.kind == SUMP and node != circuit.output:
            errors.append(f"gate {node}: vector-valued gate is not the output")
    if circuit.output >= circuit.inputs:
        out_layer = circuit.gates[circuit.output - circuit.inputs].layer
        if out_layer != depth:
            errors.append(f"output sits in layer {out_layer}, shape has {depth}")
    elif depth:
        errors.append("output is an input node but the shape has layers")
    return (not errors, errors)


def shape_of(circuit: CCircuit) -> str:
    """Reconstruct a descriptor from the gates (wildcard AND/OR params)."""
    by_layer: dict[int, Gate] = {}
    for g in circuit.gates:
        by_layer.setdefault(g.layer, g)
    specs = []
    for layer in sorted(by_layer):
        g = by_layer[layer]
        if g.kind in (AND, OR):
            specs.append(LayerSpec(g.kind, None))
        elif g.kind == MOD:
            specs.append(LayerSpec(MOD, g.m))
        else:
            specs.append(LayerSpec(g.kind, g.p))
    return format_shape(specs)
