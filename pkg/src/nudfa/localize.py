"""Local structure of prime quotients: minimal sets and traces.

For a covering pair (lo, hi) of congruences, a minimal set is an
inclusion-minimal range of a unary polynomial that does not collapse hi into
lo.  Traces are the hi-blocks of a minimal set that consist of more than one
lo-block; on nilpotent fixtures they carry elementary abelian group structure
reachable through the Malcev polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .algebra import FiniteAlgebra, UnaryClone, UnaryFn
from .circuits import AlgCircuit, eval_circuit
from .congruence import CongruenceLattice, principal_congruence
from .partitions import Partition


@dataclass(frozen=True)
class MinimalSet:
    """An inclusion-minimal polynomial range U witnessing lo < hi locally."""

    universe: frozenset[int]
    witness: UnaryFn
    idempotent: Optional[UnaryFn]  # range exactly U, e o e = e (when found)


def _separates(fn: UnaryFn, lo: Partition, hi: Partition) -> bool:
    """fn maps some hi-related pair outside lo."""
    return any(
        not lo.same(fn.values[a], fn.values[b]) for a, b in hi.pairs()
    )


def minimal_sets(
    algebra: FiniteAlgebra,
    clone: UnaryClone,
    lo: Partition,
    hi: Partition,
) -> list[MinimalSet]:
    """All minimal sets of the pair (lo, hi), sorted canonically.

    Scans the unary clone for functions separating hi from lo, keeps the
    inclusion-minimal ranges, and attaches an idempotent with that exact
    range: a power of the witness when one works, otherwise a clone search.
    """
    separating: dict[frozenset[int], UnaryFn] = {}
    for fn in clone:
        if _separates(fn, lo, hi):
            separating.setdefault(fn.image, fn)
    ranges = list(separating)
    minimal = [
        r for r in ranges if not any(o < r for o in ranges)
    ]
    out = []
    for r in sorted(minimal, key=sorted):
        witness = separating[r]
        idem = _idempotent_for(algebra, clone, witness, r)
        out.append(MinimalSet(r, witness, idem))
    return out


def _idempotent_for(
    algebra: FiniteAlgebra,
    clone: UnaryClone,
    witness: UnaryFn,
    universe: frozenset[int],
) -> Optional[UnaryFn]:
    n = algebra.size
    power = witness.values
    for _ in range(n):
        fn = clone.lookup(power)
        if fn is not None and fn.image == universe and fn.is_idempotent():
            return fn
        power = tuple(witness.values[x] for x in power)
    return clone.find(lambda f: f.image == universe and f.is_idempotent())


def traces(
    algebra: FiniteAlgebra,
    universe: frozenset[int],
    lo: Partition,
    hi: Partition,
) -> list[frozenset[int]]:
    """Trace bodies of a minimal set: the hi|U-blocks that are not single
    lo|U-blocks, each returned as the full block (a union of lo-blocks)."""
    members = sorted(universe)
    hi_blocks: dict[int, list[int]] = {}
    for x in members:
        hi_blocks.setdefault(hi.class_of[x], []).append(x)
    out = []
    for block in hi_blocks.values():
        lo_ids = {lo.class_of[x] for x in block}
        if len(lo_ids) > 1:
            out.append(frozenset(block))
    return sorted(out, key=sorted)


def minimal_set_through(
    algebra: FiniteAlgebra,
    clone: UnaryClone,
    lat: CongruenceLattice,
    lo: Partition,
    hi: Partition,
    e: int,
) -> Optional[MinimalSet]:
    """A minimal set of (lo, hi) containing the element e.

    Walks the underlying existence argument: pick any minimal set V and a
    pair (c, d) in hi|V - lo, find a with (e, a) generated by (c, d) but
    outside lo, then a unary polynomial p with p(c, d) = (e, a); p(V) is the
    requested minimal set.  Returns None (with no side effects) if some step
    finds no witness.
    """
    sets = minimal_sets(algebra, clone, lo, hi)
    if not sets:
        return None
    ranges = {s.universe for s in sets}
    for base in sets:
        members = sorted(base.universe)
        for c in members:
            for d in members:
                if c == d or lo.same(c, d) or not hi.same(c, d):
                    continue
                theta = principal_congruence(algebra, c, d, clone)
                for a in algebra.elements:
                    if lo.same(e, a) or not theta.same(e, a):
                        continue
                    p = clone.mapping([(c, e), (d, a)])
                    if p is None:
                        continue
                    image = frozenset(p.values[x] for x in members)
                    if image in ranges:
                        idem = _idempotent_for(algebra, clone, p, image)
                        return MinimalSet(image, p, idem)
    return None


# ---------------------------------------------------------------------------
# Local invariant checkers
# ---------------------------------------------------------------------------


def atom_blocks_simple(
    algebra: FiniteAlgebra, clone: UnaryClone, beta: Partition
) -> bool:
    """Every block of an atom congruence is polynomially simple: collapsing
    any two distinct members via block-preserving unary polynomials and
    chaining collapses the whole block."""
    for block in beta.blocks():
        if len(block) == 1:
            continue
        bset = set(block)
        keep = [f for f in clone if all(f.values[x] in bset for x in block)]
        for a in block:
            for b in block:
                if a >= b:
                    continue
                part = Partition.from_pairs(
                    algebra.size, [(f.values[a], f.values[b]) for f in keep]
                )
                if len({part.class_of[x] for x in block}) != 1:
                    return False
    return True


def block_group(
    algebra: FiniteAlgebra,
    malcev: AlgCircuit,
    beta: Partition,
    e: int,
) -> tuple[dict[tuple[int, int], int], int]:
    """The block of e under x + y = d(x, e, y) must be an elementary abelian
    p-group with zero e; returns (operation table, prime p) or raises."""
    block = beta.block_of(e)
    add = {}
    bset = set(block)
    for x in block:
        for y in block:
            v = eval_circuit(algebra, malcev, (x, e, y))
            if v not in bset:
                raise ValueError(f"pseudo-addition leaves the block: {x}+{y}={v}")
            add[(x, y)] = v
    for x in block:
        if add[(x, e)] != x or add[(e, x)] != x:
            raise ValueError("e is not a neutral element")
        if all(add[(x, y)] != e for y in block):
            raise ValueError(f"{x} has no inverse")
        for y in block:
            if add[(x, y)] != add[(y, x)]:
                raise ValueError("pseudo-addition is not commutative")
            for z in block:
                if add[(add[(x, y)], z)] != add[(x, add[(y, z)])]:
                    raise ValueError("pseudo-addition is not associative")
    size = len(block)
    p = None
    for q in range(2, size + 1):
        if size % q == 0:
            p = q
            break
    if p is None:
        raise ValueError("trivial block")
    for x in block:
        acc = e
        for _ in range(p):
            acc = add[(acc, x)]
        if acc != e:
            raise ValueError(f"element {x} does not have order dividing {p}")
    return add, p
