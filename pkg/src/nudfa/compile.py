"""Program-to-modular-circuit compiler for nilpotent Malcev algebras.

Two entry points:

- :func:`compile_supernilpotent` turns a program over a supernilpotent
  algebra into an AND∘MOD(pdiv)∘OR circuit: split the algebra into
  prime-power factors, interpolate each factor's acceptance indicator over
  its prime field, and recombine the polynomials into a single MOD gate per
  accepting element.

- :func:`compile_nilpotent` handles the wider nilpotent class whose
  characteristics below the least supernilpotent quotient form a single
  prime {p}.  It compiles the supernilpotent top quotient as a base case,
  then walks a maximal congruence chain downward.  Each step splits the
  current algebra as module-times-quotient along an abelian atom (a
  :class:`CentralRep`), writes the module component of every circuit value
  as an affine combination of instruction bits and per-gate correction
  terms, lowers those through indicator circuits from the previous level,
  and glues with the quotient circuit.  The output shape is
  AND∘MOD(m)∘MOD(p) with m the squarefree part of the quotient order.

Every constructed representation is verified pointwise on all tuples, and
every emitted circuit is checked against its truth-table oracle whenever
the input word is narrow enough.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .algebra import FiniteAlgebra, UnaryClone, verify_malcev, find_malcev_polynomial
from .circuits import AlgCircuit, CONST, GATE, VAR
from .congruence import (
    CongruenceLattice,
    all_congruences,
    charr_set,
    commutator,
    distinguished_congruences,
    is_nilpotent_congruence,
    is_pupi,
    is_supernilpotent_algebra,
    pdiv,
    prime_power_decomposition,
    sigma_for_prime,
)
from .fieldpoly import is_prime, multilinear_interpolate
from .limits import Budget, charge, default_budget
from .localize import block_group
from .lowering import (
    VERIFY_INPUT_BOUND,
    AtomPool,
    ModSum,
    PassReport,
    and_sum_lower,
    apply_func,
    collapse_5to3,
    emit_modsum,
    make_atom,
)
from .modcircuit import (
    AND,
    MOD,
    OR,
    SUMPC,
    CCircuit,
    Gate,
    cc_truth_table,
    eval_cc,
    shape_of,
    validate_shape,
)
from .partitions import Partition, project
from .programs import (
    AlgProgram,
    map_circuit_constants,
    quotient_program,
    truth_table,
)


class HypothesisViolation(Exception):
    """The input algebra falls outside the compilable class."""


# ---------------------------------------------------------------------------
# Small dense linear algebra over Z_p (nu stays tiny)
# ---------------------------------------------------------------------------

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]


def mat_zero(nu: int) -> Matrix:
    return tuple((0,) * nu for _ in range(nu))


def mat_identity(nu: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(nu)) for i in range(nu))


def mat_add(a: Matrix, b: Matrix, p: int) -> Matrix:
    return tuple(
        tuple((x + y) % p for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def mat_mul(a: Matrix, b: Matrix, p: int) -> Matrix:
    nu = len(a)
    return tuple(
        tuple(
            sum(a[i][k] * b[k][j] for k in range(nu)) % p for j in range(nu)
        )
        for i in range(nu)
    )


def mat_vec(a: Matrix, v: Vector, p: int) -> Vector:
    return tuple(sum(row[k] * v[k] for k in range(len(v))) % p for row in a)


def vec_add(a: Vector, b: Vector, p: int) -> Vector:
    return tuple((x + y) % p for x, y in zip(a, b))


def vec_sub(a: Vector, b: Vector, p: int) -> Vector:
    return tuple((x - y) % p for x, y in zip(a, b))


def _is_zero_mat(a: Matrix) -> bool:
    return all(all(x == 0 for x in row) for row in a)


# ---------------------------------------------------------------------------
# Central representations along an abelian atom
# ---------------------------------------------------------------------------


@dataclass
class CentralRep:
    """Split of an algebra D as (module M) x (quotient D') along an atom.

    M is the atom block of the anchor, an elementary abelian p-group of
    dimension nu under x + y = d(x, e, y).  Every basic operation then acts
    as f(d1..dr) = (sum alpha_i . d_i^M  +  hat_f(classes), f'(classes)):
    the alpha matrices and hat tables are extracted from the operation
    tables and the whole identity is re-checked on every tuple.
    """

    D: FiniteAlgebra
    beta: Partition
    e: int
    malcev: AlgCircuit
    p: int
    nu: int
    module: tuple[int, ...]  # the block of e, sorted
    basis: tuple[int, ...]
    add: dict  # (x, y) in M^2 -> x + y
    quotient: FiniteAlgebra
    proj: tuple[int, ...]  # D -> D' class indices
    transversal: tuple[int, ...]  # class -> least element
    coords: dict  # M element -> Z_p^nu vector
    from_coords: dict  # vector -> M element
    mcoords: tuple[Vector, ...]  # element of D -> coords of its M-part
    alpha: dict  # op name -> tuple of nu x nu matrices (one per argument)
    hat: dict  # op name -> {class tuple -> Z_p^nu vector}

    def m_part(self, x: int) -> int:
        return self.from_coords[self.mcoords[x]]

    def encode(self, x: int) -> tuple[int, int]:
        return self.m_part(x), self.proj[x]

    def decode(self, mval: int, cls: int) -> int:
        from .circuits import eval_circuit

        return eval_circuit(self.D, self.malcev, (mval, self.e, self.transversal[cls]))


def central_representation(
    D: FiniteAlgebra,
    beta: Partition,
    e: int,
    malcev: AlgCircuit,
    clone: Optional[UnaryClone] = None,
    budget: Optional[Budget] = None,
) -> CentralRep:
    """Build and exhaustively verify the module/quotient split along beta."""
    from .circuits import eval_circuit

    budget = budget or default_budget()
    if not verify_malcev(D, malcev):
        raise ValueError("the supplied circuit is not a Malcev polynomial")
    clone = clone or UnaryClone(D, budget)
    if not commutator(D, beta, beta, clone).is_identity():
        raise HypothesisViolation("the congruence is not abelian")

    add, p = block_group(D, malcev, beta, e)
    module = tuple(sorted(beta.block_of(e)))
    if e != module[0]:
        raise ValueError("the anchor must be the least element of its block")

    # greedy independent generators of (M, +)
    span = {e}
    basis: list[int] = []
    for x in module:
        if x in span:
            continue
        basis.append(x)
        grown = set()
        for s in span:
            t = s
            for _ in range(p):
                grown.add(t)
                t = add[(t, x)]
        span = grown
    nu = len(basis)
    if p**nu != len(module):
        raise HypothesisViolation(
            f"module block has size {len(module)}, not a power of {p}"
        )

    coords: dict[int, Vector] = {}
    for combo in product(range(p), repeat=nu):
        elt = e
        for c, b in zip(combo, basis):
            for _ in range(c):
                elt = add[(elt, b)]
        if elt in coords:
            raise HypothesisViolation("basis is not independent")
        coords[elt] = tuple(combo)
    from_coords = {v: k for k, v in coords.items()}
    for x in module:
        for y in module:
            if vec_add(coords[x], coords[y], p) != coords[add[(x, y)]]:
                raise HypothesisViolation("coordinates do not respect addition")

    from .algebra import quotient_algebra

    quotient, proj = quotient_algebra(D, beta)
    transversal = tuple(
        min(x for x in range(D.size) if proj[x] == c) for c in range(quotient.size)
    )
    if transversal[proj[e]] != e:
        raise ValueError("anchor is not the least element of its class")

    mpart = []
    for x in range(D.size):
        mv = eval_circuit(D, malcev, (x, transversal[proj[x]], e))
        if mv not in coords:
            raise HypothesisViolation(f"module part of {x} escapes the block")
        mpart.append(mv)
    for x in range(D.size):
        back = eval_circuit(D, malcev, (mpart[x], e, transversal[proj[x]]))
        if back != x:
            raise HypothesisViolation(f"encode/decode fails at {x}")
    mcoords = tuple(coords[mv] for mv in mpart)

    ref = proj[e]
    alpha: dict[str, tuple[Matrix, ...]] = {}
    hat: dict[str, dict[tuple, Vector]] = {}
    for op in D.ops:
        r = op.arity
        table: dict[tuple, Vector] = {}
        for cbar in product(range(quotient.size), repeat=r):
            val = D.eval_op(op.name, [transversal[c] for c in cbar])
            table[cbar] = mcoords[val]
        hat[op.name] = table
        base = table[(ref,) * r]
        mats = []
        for i in range(r):
            cols = []
            for b in basis:
                args = [e] * r
                args[i] = b  # decode(b, class of e) = d(b, e, e) = b
                val = D.eval_op(op.name, args)
                cols.append(vec_sub(mcoords[val], base, p))
            mats.append(
                tuple(
                    tuple(cols[t][row] for t in range(nu)) for row in range(nu)
                )
            )
        alpha[op.name] = tuple(mats)

        # the representation identity, on every tuple: this is the hard gate
        for dbar in product(range(D.size), repeat=r):
            val = D.eval_op(op.name, list(dbar))
            want_cls = quotient.eval_op(op.name, [proj[d] for d in dbar])
            acc = table[tuple(proj[d] for d in dbar)]
            for i, d in enumerate(dbar):
                acc = vec_add(acc, mat_vec(mats[i], mcoords[d], p), p)
            if proj[val] != want_cls or mcoords[val] != acc:
                raise HypothesisViolation(
                    f"representation identity fails for {op.name} at {dbar}: "
                    f"value {val} vs ({acc}, class {want_cls})"
                )

    return CentralRep(
        D=D,
        beta=beta,
        e=e,
        malcev=malcev,
        p=p,
        nu=nu,
        module=module,
        basis=tuple(basis),
        add=add,
        quotient=quotient,
        proj=proj,
        transversal=transversal,
        coords=coords,
        from_coords=from_coords,
        mcoords=mcoords,
        alpha=alpha,
        hat=hat,
    )


def path_coefficients(
    circuit: AlgCircuit, rep: CentralRep, root: Optional[int] = None
) -> tuple[dict[int, Matrix], dict[int, Matrix]]:
    """Module-part weight of every node reachable from the root.

    The root weighs the identity; a gate passes weight W down to its i-th
    child as W * alpha_i, summed over all paths (the DAG is hash-consed, so
    one node stands for every occurrence of its subterm).  Returns
    (per-node weights, per-variable-index weights).
    """
    root = circuit.output if root is None else root
    p, nu = rep.p, rep.nu
    reach: set[int] = set()
    stack = [root]
    while stack:
        v = stack.pop()
        if v in reach:
            continue
        reach.add(v)
        node = circuit.nodes[v]
        if node[0] == GATE:
            stack.extend(node[2])
    coeff: dict[int, Matrix] = {root: mat_identity(nu)}
    for v in sorted(reach, reverse=True):
        W = coeff.get(v)
        if W is None:
            coeff[v] = W = mat_zero(nu)
        node = circuit.nodes[v]
        if node[0] == GATE:
            alphas = rep.alpha[node[1]]
            for i, child in enumerate(node[2]):
                prev = coeff.get(child, mat_zero(nu))
                coeff[child] = mat_add(prev, mat_mul(W, alphas[i], p), p)
    variables = {
        circuit.nodes[v][1]: coeff[v]
        for v in reach
        if circuit.nodes[v][0] == VAR
    }
    return coeff, variables


# ---------------------------------------------------------------------------
# Compile cache (write-once per key)
# ---------------------------------------------------------------------------


class CompileCache:
    """Indicator circuits keyed by (circuit node id, target value)."""

    def __init__(self) -> None:
        self._store: dict[tuple[int, int], CCircuit] = {}

    def put(self, key: tuple[int, int], circuit: CCircuit) -> None:
        if key in self._store:
            raise ValueError(f"cache key {key} written twice")
        self._store[key] = circuit

    def get(self, key: tuple[int, int]) -> CCircuit:
        try:
            return self._store[key]
        except KeyError:
            raise KeyError(f"no compiled circuit for node/target {key}") from None

    def __len__(self) -> int:
        return len(self._store)

    def __contains__(self, key: tuple[int, int]) -> bool:
        return key in self._store


# ---------------------------------------------------------------------------
# Supernilpotent base case
# ---------------------------------------------------------------------------


def _eval_nodes(
    algebra: FiniteAlgebra, circuit: AlgCircuit, args: Sequence[int]
) -> list[int]:
    vals: list[int] = []
    for node in circuit.nodes:
        if node[0] == VAR:
            vals.append(args[node[1]])
        elif node[0] == CONST:
            vals.append(node[1])
        else:
            vals.append(algebra.eval_op(node[1], [vals[c] for c in node[2]]))
    return vals


def _node_value_tables(
    program: AlgProgram, budget: Budget
) -> list[list[int]]:
    """tables[node][row] = value of the circuit node on input word `row`."""
    if program.n > budget.truth_table_bits:
        raise ValueError("too many input bits for value tables")
    tables: list[list[int]] = [
        [0] * (1 << program.n) for _ in program.circuit.nodes
    ]
    for row in range(1 << program.n):
        word = [(row >> i) & 1 for i in range(program.n)]
        args = [0] * program.circuit.k
        for ins in program.instructions:
            args[ins.var] = ins.value(word)
        vals = _eval_nodes(program.algebra, program.circuit, args)
        for node, v in enumerate(vals):
            tables[node][row] = v
    return tables


def _combined_indicator(
    value_table: Sequence[int],
    target: int,
    dec,
    m: int,
    delta: int,
    budget: Budget,
) -> tuple[dict[frozenset, int], int]:
    """Monomial coefficients mod m and accepted residue for [value == target].

    Per prime-power factor, interpolate the factor indicator over GF(p_j),
    then recombine with the coprime weights m/p_j; the word is accepted
    exactly when the combined sum hits delta = sum of the weights.
    """
    acc: dict[frozenset, int] = {}
    const = 0
    for j, pj in enumerate(dec.primes):
        proj_j = dec.projections[j]
        tj = proj_j[target]
        table = [1 if proj_j[v] == tj else 0 for v in value_table]
        w = multilinear_interpolate(table, pj)
        scale = m // pj
        for key, cf in w.terms.items():
            if key:
                v = (acc.get(key, 0) + scale * cf) % m
                if v:
                    acc[key] = v
                else:
                    acc.pop(key, None)
            else:
                const = (const + scale * cf) % m
    charge(len(acc), budget.monomials, "base-case monomials")
    return acc, (delta - const) % m


def compile_supernilpotent(
    program: AlgProgram, budget: Optional[Budget] = None
) -> tuple[CCircuit, PassReport]:
    """Program over a supernilpotent algebra as AND∘MOD(pdiv)∘OR."""
    budget = budget or default_budget()
    A = program.algebra
    lat = all_congruences(A, budget=budget)
    if not is_supernilpotent_algebra(A, lat):
        raise HypothesisViolation(f"{A.name} is not supernilpotent")
    ok, _ = is_pupi(A, lat, lat.zero, lat.one)
    if not ok:
        raise HypothesisViolation(
            f"{A.name} has no prime-uniform independent interval split"
        )
    dec = prime_power_decomposition(A, lat)
    m = pdiv(A)
    delta = sum(m // pj for pj in dec.primes) % m

    root_values = _node_value_tables(program, budget)[program.circuit.output]
    branches = [
        _combined_indicator(root_values, c, dec, m, delta, budget)
        for c in sorted(program.accepting)
    ]

    monos = sorted(
        {key for acc, _ in branches for key in acc},
        key=lambda k: (len(k), sorted(k)),
    )
    n = program.n
    gates: list[Gate] = []
    mono_node = {}
    for key in monos:
        mono_node[key] = n + len(gates)
        gates.append(
            Gate(kind=AND, layer=1, wires=tuple((i, 1) for i in sorted(key)))
        )
    branch_nodes = []
    for acc, resid in branches:
        wires = tuple(
            (mono_node[key], acc[key])
            for key in sorted(acc, key=lambda k: (len(k), sorted(k)))
        )
        branch_nodes.append(n + len(gates))
        gates.append(
            Gate(kind=MOD, layer=2, wires=wires, m=m, accepting=frozenset({resid}))
        )
    gates.append(
        Gate(kind=OR, layer=3, wires=tuple((b, 1) for b in branch_nodes))
    )
    width = max((len(k) for k in monos), default=1)
    circuit = CCircuit(
        inputs=n,
        gates=tuple(gates),
        output=n + len(gates) - 1,
        declared_shape=f"AND({width})∘MOD({m})∘OR({len(branches)})",
    )

    verified: Optional[bool] = None
    if n <= VERIFY_INPUT_BOUND:
        want = truth_table(program, budget)
        got = cc_truth_table(circuit)
        if [bool(v) for v in got] != want:
            raise AssertionError("base-case circuit disagrees with the program")
        verified = True
    return circuit, PassReport(
        pass_name="compile_supernilpotent",
        input_shape=f"program(size={program.size})",
        output_shape=circuit.declared_shape or shape_of(circuit),
        input_size=program.size,
        output_size=circuit.size,
        verified=verified,
    )


# ---------------------------------------------------------------------------
# Descent along an abelian atom
# ---------------------------------------------------------------------------

_BIT_CIRCUITS: dict[tuple[int, int, int, int], CCircuit] = {}


def _bit_passthrough(n: int, bit: int, m: int, p: int) -> CCircuit:
    """3-layer circuit computing input bit `bit` (wire discipline filler)."""
    key = (n, bit, m, p)
    cc = _BIT_CIRCUITS.get(key)
    if cc is None:
        pool = AtomPool()
        atom = make_atom(m, {frozenset([bit]): 1}, {1})
        assert atom is not None
        cc = emit_modsum(
            n, m, p, pool, ModSum(p, 0, {pool.get(atom): 1}),
            and_layer=True, final=MOD,
        )
        _BIT_CIRCUITS[key] = cc
    return cc


class _LayerMerge:
    """Structurally dedup the 3-layer sub-circuits into shared layers."""

    def __init__(self, inputs: int) -> None:
        self.inputs = inputs
        self.gates: list[Gate] = []
        self._intern: dict[Gate, int] = {}

    def add_gate(self, gate: Gate) -> int:
        node = self._intern.get(gate)
        if node is None:
            node = self.inputs + len(self.gates)
            self.gates.append(gate)
            self._intern[gate] = node
        return node

    def add_sub(self, sub: CCircuit) -> int:
        if sub.inputs != self.inputs:
            raise ValueError("sub-circuit reads a different input word")
        remap: dict[int, int] = {i: i for i in range(sub.inputs)}
        for gid, gate in enumerate(sub.gates):
            rewired = Gate(
                kind=gate.kind,
                layer=gate.layer,
                wires=tuple((remap[s], mult) for s, mult in gate.wires),
                m=gate.m,
                accepting=gate.accepting,
                p=gate.p,
                nu=gate.nu,
                coeffs=gate.coeffs,
                offset=gate.offset,
                target=gate.target,
            )
            remap[sub.inputs + gid] = self.add_gate(rewired)
        return remap[sub.output]


def descend_mod_beta(
    program: AlgProgram,
    node: int,
    target: int,
    rep: CentralRep,
    cache: CompileCache,
    m: int,
    p: int,
    budget: Optional[Budget] = None,
    reports: Optional[list[PassReport]] = None,
    value_table: Optional[Sequence[int]] = None,
) -> CCircuit:
    """One chain step: compile [node value == target] over rep.D.

    ``cache`` holds the previous level's indicator circuits, keyed by
    (child node, class of rep.quotient).  The module part of the value is
    an affine combination over Z_p^nu of instruction bits and per-gate
    correction terms; corrections are expanded through class-indicator
    booleans, lowered, assembled as a 5-layer circuit, collapsed to three
    layers and AND-glued with the quotient-level indicator.
    """
    budget = budget or default_budget()
    if program.algebra is not rep.D and program.algebra != rep.D:
        raise ValueError("program and representation disagree on the algebra")
    n = program.n
    nu = rep.nu
    circuit = program.circuit
    coeff, var_coeff = path_coefficients(circuit, rep, root=node)

    ins_by_var = {ins.var: ins for ins in program.instructions}
    offset = (0,) * nu
    bit_vecs: dict[int, Vector] = {}
    for var_idx, W in sorted(var_coeff.items()):
        ins = ins_by_var[var_idx]
        base = rep.mcoords[ins.a0]
        delta = vec_sub(rep.mcoords[ins.a1], base, p)
        offset = vec_add(offset, mat_vec(W, base, p), p)
        dv = mat_vec(W, delta, p)
        if any(dv):
            bit_vecs[ins.bit] = vec_add(
                bit_vecs.get(ins.bit, (0,) * nu), dv, p
            )

    s = rep.quotient.size
    mono_vecs: dict[frozenset, Vector] = {}
    need_subs: set[tuple[int, int]] = set()
    for v in sorted(coeff):
        nd = circuit.nodes[v]
        W = coeff[v]
        if nd[0] == CONST:
            offset = vec_add(offset, mat_vec(W, rep.mcoords[nd[1]], p), p)
        elif nd[0] == GATE:
            if _is_zero_mat(W):
                continue
            children = nd[2]
            r = len(children)
            width = r * s
            charge(1 << width, budget.monomials, "correction-term table")
            hat = rep.hat[nd[1]]
            table = []
            for ybits in range(1 << width):
                classes = []
                for pos in range(r):
                    cls = 0
                    for l in range(s):
                        if (ybits >> (pos * s + l)) & 1:
                            cls = l
                            break
                    classes.append(cls)
                table.append(hat[tuple(classes)])
            low_cc, _ = and_sum_lower(table, p, budget)
            sump = low_cc.gates[low_cc.output - low_cc.inputs]
            offset = vec_add(offset, mat_vec(W, sump.offset, p), p)
            for (src, mult), mat in zip(sump.wires, sump.coeffs):
                vec = tuple((mult * sum(mat[j])) % p for j in range(nu))
                wv = mat_vec(W, vec, p)
                if not any(wv):
                    continue
                and_gate = low_cc.gates[src - low_cc.inputs]
                pairs = frozenset(
                    (children[pos // s], pos % s)
                    for pos, _mult in and_gate.wires
                )
                need_subs |= pairs
                mono_vecs[pairs] = vec_add(
                    mono_vecs.get(pairs, (0,) * nu), wv, p
                )

    merge = _LayerMerge(n)
    sub_out: dict[tuple[int, int], int] = {}
    for key in sorted(need_subs):
        sub_out[key] = merge.add_sub(cache.get(key))
    bit_out: dict[int, int] = {}
    for bit in sorted(bit_vecs):
        bit_out[bit] = merge.add_sub(_bit_passthrough(n, bit, m, p))

    def col_matrix(vec: Vector) -> Matrix:
        return tuple(
            tuple(vec[row] if c == 0 else 0 for c in range(nu))
            for row in range(nu)
        )

    sumpc_wires: list[tuple[int, int]] = []
    sumpc_mats: list[Matrix] = []
    for key in sorted(mono_vecs, key=lambda k: sorted(k)):
        srcs = sorted({sub_out[pair] for pair in key})
        gate_id = merge.add_gate(
            Gate(kind=AND, layer=4, wires=tuple((x, 1) for x in srcs))
        )
        sumpc_wires.append((gate_id, 1))
        sumpc_mats.append(col_matrix(mono_vecs[key]))
    for bit in sorted(bit_vecs):
        gate_id = merge.add_gate(
            Gate(kind=AND, layer=4, wires=((bit_out[bit], 1),))
        )
        sumpc_wires.append((gate_id, 1))
        sumpc_mats.append(col_matrix(bit_vecs[bit]))

    target_vec = rep.mcoords[target]
    gates = list(merge.gates)
    gates.append(
        Gate(
            kind=SUMPC,
            layer=5,
            wires=tuple(sumpc_wires),
            p=p,
            nu=nu,
            coeffs=tuple(sumpc_mats),
            offset=offset,
            target=target_vec,
        )
    )
    five = CCircuit(
        inputs=n,
        gates=tuple(gates),
        output=n + len(gates) - 1,
        declared_shape=f"AND(*)∘MOD({m})∘MOD({p})∘AND(*)∘SUMPC({p})",
    )
    ok, errors = validate_shape(five)
    if not ok:
        raise AssertionError(f"assembled circuit is malformed: {errors[0]}")

    five_verified: Optional[bool] = None
    if n <= VERIFY_INPUT_BOUND:
        if value_table is None:
            value_table = [
                _eval_nodes(
                    program.algebra,
                    circuit,
                    _instruction_args(program, row),
                )[node]
                for row in range(1 << n)
            ]
        for row in range(1 << n):
            word = [(row >> i) & 1 for i in range(n)]
            want = 1 if rep.mcoords[value_table[row]] == target_vec else 0
            got = eval_cc(five, word)
            if got != want:
                raise AssertionError(
                    f"module-part circuit disagrees at word {word}: "
                    f"got {got}, expected {want}"
                )
        five_verified = True
    if reports is not None:
        reports.append(
            PassReport(
                pass_name=f"descend_assemble[node={node},target={target}]",
                input_shape="module-part display",
                output_shape=shape_of(five),
                input_size=program.size,
                output_size=five.size,
                verified=five_verified,
            )
        )

    collapsed, creport = collapse_5to3(five, budget)
    if reports is not None:
        reports.append(creport)

    quotient_cc = cache.get((node, rep.proj[target]))
    glued, greport = apply_func([0, 0, 0, 1], [quotient_cc, collapsed], budget)
    if reports is not None:
        reports.append(greport)

    if n <= VERIFY_INPUT_BOUND and value_table is not None:
        for row in range(1 << n):
            word = [(row >> i) & 1 for i in range(n)]
            want = 1 if value_table[row] == target else 0
            if eval_cc(glued, word) != want:
                raise AssertionError(
                    f"descended circuit disagrees at word {word}"
                )
    return glued


def _instruction_args(program: AlgProgram, row: int) -> list[int]:
    word = [(row >> i) & 1 for i in range(program.n)]
    args = [0] * program.circuit.k
    for ins in program.instructions:
        args[ins.var] = ins.value(word)
    return args


# ---------------------------------------------------------------------------
# The full nilpotent pipeline
# ---------------------------------------------------------------------------


def _smallest_coprime_prime(size: int) -> int:
    q = 2
    while True:
        if is_prime(q) and size % q != 0:
            return q
        q += 1


def _maximal_chain(
    lat: CongruenceLattice, top: Partition
) -> list[Partition]:
    """Lexicographically least maximal chain from zero to ``top``."""
    chain = [lat.zero]
    cur = lat.zero
    while cur != top:
        cur_i = lat.index(cur)
        nexts = sorted(
            b
            for a, b in lat.covers
            if a == cur_i and lat.elements[b].leq(top)
        )
        if not nexts:
            raise AssertionError("chain construction stuck below the target")
        cur = lat.elements[nexts[0]]
        chain.append(cur)
    return chain


def _same_op_tables(a: FiniteAlgebra, b: FiniteAlgebra) -> bool:
    if a.size != b.size or len(a.ops) != len(b.ops):
        return False
    return all(
        (x.name, x.arity, x.table) == (y.name, y.arity, y.table)
        for x, y in zip(a.ops, b.ops)
    )


def _or_table(k: int) -> list[int]:
    return [0 if idx == 0 else 1 for idx in range(1 << k)]


def _constant_circuit(n: int, m: int, p: int, value: int) -> CCircuit:
    return emit_modsum(
        n, m, p, AtomPool(), ModSum(p, value), and_layer=True, final=MOD
    )


def _base_modsum(
    pool: AtomPool,
    value_table: Sequence[int],
    target: int,
    dec,
    m: int,
    p: int,
    delta: int,
    budget: Budget,
) -> ModSum:
    acc, resid = _combined_indicator(value_table, target, dec, m, delta, budget)
    atom = make_atom(m, acc, {resid})
    if atom is None:
        return ModSum(p, 1 if resid == 0 else 0)
    return ModSum(p, 0, {pool.get(atom): 1})


def compile_nilpotent(
    program: AlgProgram,
    malcev: Optional[AlgCircuit] = None,
    budget: Optional[Budget] = None,
    trace: Optional[list[PassReport]] = None,
) -> tuple[CCircuit, list[PassReport]]:
    """Compile a program over a nilpotent Malcev algebra whose
    characteristics below the least supernilpotent quotient are one prime.

    Output is an AND∘MOD(m)∘MOD(p) circuit with m the product of the other
    primes; its truth table is checked against the program whenever the
    word is narrow enough.
    """
    budget = budget or default_budget()
    reports: list[PassReport] = trace if trace is not None else []
    A = program.algebra
    n = program.n
    lat = all_congruences(A, budget=budget)
    if not is_nilpotent_congruence(lat, lat.one):
        raise HypothesisViolation(f"{A.name} is not nilpotent")
    if malcev is None:
        malcev = find_malcev_polynomial(A, budget=budget)
        if malcev is None:
            raise HypothesisViolation(
                f"no Malcev polynomial of {A.name} found within the depth bound"
            )
    elif not verify_malcev(A, malcev):
        raise ValueError("the supplied circuit is not a Malcev polynomial")

    dist = distinguished_congruences(A, lat)
    kappa = dist.smallest_supernilpotent_quotient
    chars = charr_set(A, lat, lat.zero, kappa)
    if not chars:
        assert kappa.is_identity()
        p = _smallest_coprime_prime(A.size)
    elif len(chars) == 1:
        p = next(iter(chars))
    else:
        raise HypothesisViolation(
            f"characteristics below the supernilpotent quotient are "
            f"{sorted(chars)}; need a single prime"
        )

    sigma = sigma_for_prime(A, lat, p)
    if not kappa.leq(sigma):
        raise AssertionError("supernilpotent quotient escapes the p-radical")
    Abar, _ = lat.quotient(sigma)
    m = pdiv(Abar)
    if chars:
        assert m * p == pdiv(A), "quotient primes do not complement p"
    if m == 1:
        raise HypothesisViolation(
            "the p-radical covers the whole algebra; the two-modulus "
            "construction needs a nontrivial coprime quotient"
        )
    assert m % p != 0

    chain = _maximal_chain(lat, sigma)
    h = len(chain) - 1
    progs: list[AlgProgram] = []
    projs: list[tuple[int, ...]] = []
    for gamma in chain:
        Pj, mapping = quotient_program(program, gamma)
        progs.append(Pj)
        projs.append(mapping)

    vals = _node_value_tables(program, budget)
    nodes = range(len(program.circuit.nodes))
    root = program.circuit.output
    S0 = sorted({projs[0][c] for c in program.accepting})

    # base level: supernilpotent quotient, one atom per (node, target)
    top = progs[h]
    assert _same_op_tables(top.algebra, Abar)
    latbar = all_congruences(Abar, budget=budget)
    okp, _ = is_pupi(Abar, latbar, latbar.zero, latbar.one)
    if not okp:
        raise HypothesisViolation(
            "supernilpotent quotient has no independent prime split"
        )
    dec = prime_power_decomposition(Abar, latbar)
    delta = sum(m // pj for pj in dec.primes) % m

    cache = CompileCache()
    base_entries = (
        [(root, t) for t in sorted({projs[0][c] for c in program.accepting})]
        if h == 0
        else [(q, t) for q in nodes for t in range(Abar.size)]
    )
    base_total = 0
    for q, t in base_entries:
        table = [projs[h][v] for v in vals[q]]
        pool = AtomPool()
        modsum = _base_modsum(pool, table, t, dec, m, p, delta, budget)
        cc = emit_modsum(n, m, p, pool, modsum, and_layer=True, final=MOD)
        if n <= VERIFY_INPUT_BOUND:
            for row, v in enumerate(table):
                word = [(row >> i) & 1 for i in range(n)]
                if eval_cc(cc, word) != (1 if v == t else 0):
                    raise AssertionError(
                        f"base indicator for node {q}, target {t} wrong at {word}"
                    )
        cache.put((q, t), cc)
        base_total += cc.size
    reports.append(
        PassReport(
            pass_name=f"base_cache[{len(base_entries)} entries]",
            input_shape=f"program(size={program.size})/supernilpotent quotient",
            output_shape=f"AND(*)∘MOD({m})∘MOD({p})",
            input_size=program.size,
            output_size=base_total,
            verified=n <= VERIFY_INPUT_BOUND or None,
        )
    )

    # descend the chain
    for j in range(h - 1, -1, -1):
        Dj = progs[j].algebra
        beta_j = project(chain[j + 1], projs[j], Dj.size)
        malcev_j = map_circuit_constants(malcev, projs[j])
        assert verify_malcev(Dj, malcev_j)
        rep = central_representation(Dj, beta_j, 0, malcev_j, budget=budget)
        if rep.p != p:
            raise AssertionError(
                f"atom at level {j} has characteristic {rep.p}, expected {p}"
            )
        assert _same_op_tables(rep.quotient, progs[j + 1].algebra)
        assert all(
            rep.proj[projs[j][x]] == projs[j + 1][x] for x in range(A.size)
        )
        entries = (
            [(root, c) for c in S0]
            if j == 0
            else [(q, t) for q in nodes for t in range(Dj.size)]
        )
        newcache = CompileCache()
        for q, t in entries:
            cc = descend_mod_beta(
                progs[j], q, t, rep, cache, m, p, budget, reports,
                value_table=[projs[j][v] for v in vals[q]],
            )
            newcache.put((q, t), cc)
        cache = newcache

    branches = [cache.get((root, c)) for c in S0]
    if not branches:
        final = _constant_circuit(n, m, p, 0)
    elif len(branches) == 1:
        final = branches[0]
    else:
        final, oreport = apply_func(_or_table(len(branches)), branches, budget)
        reports.append(oreport)

    ok, errors = validate_shape(final, f"AND(*)∘MOD({m})∘MOD({p})")
    if not ok:
        raise AssertionError(f"final circuit off-shape: {errors[0]}")
    if n <= VERIFY_INPUT_BOUND:
        want = truth_table(program, budget)
        got = [bool(v) for v in cc_truth_table(final)]
        if got != want:
            raise AssertionError("compiled circuit disagrees with the program")
    return final, reports
