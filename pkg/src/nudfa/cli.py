"""Command-line front end: one executable covering the whole toolbox.

Subcommands map onto the library modules: algebra and congruence-lattice
inspection, trace localization, program compilation, circuit lowering
passes, modular-circuit evaluation and shape checking, decision
procedures, satisfiability gadgets, program-vs-circuit verification, and
the built-in fixture registry.  Every command prints a JSON document on
stdout (DOT where requested).  Exit codes: 0 on success, 1 when an input
falls outside a procedure's domain (wrong structure class, failed
search, exceeded budget, verification mismatch), 2 on usage errors.

Algebras are given either as JSON file paths or as ``fixtures:NAME``
URIs into the registry.  Enumeration caps honor the NUDFA_BUDGET
environment variable, all randomness flows through explicit ``--seed``
options, and identical invocations print byte-identical output.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict
from typing import Optional, Sequence

from .algebra import FiniteAlgebra, UnaryClone, find_malcev_polynomial
from .circuits import AlgCircuit
from .compile import (
    HypothesisViolation,
    compile_nilpotent,
    compile_supernilpotent,
)
from .congruence import (
    CongruenceLattice,
    all_congruences,
    distinguished_congruences,
    is_supernilpotent_algebra,
    supernilpotent_rank,
)
from .fieldpoly import parse_dimacs
from .fixtures import (
    demo_names,
    demo_program,
    fixture_names,
    get_fixture,
    resolve_algebra,
    resolve_malcev,
)
from .hardness import (
    GadgetSearchError,
    WitnessFailure,
    build_two_prime_program,
    cnf_to_lattice_program,
    find_two_prime_witness,
)
from .limits import BudgetExceeded, charge, default_budget
from .localize import minimal_sets, traces
from .lowering import (
    collapse_5to3,
    finalize_boolean_sum,
    modm_andd_to_sum,
    unmod,
)
from .modcircuit import (
    MOD,
    SUMP,
    SUMPC,
    CCircuit,
    cc_truth_table,
    eval_cc,
    shape_of,
    validate_shape,
)
from .partitions import Partition
from .programs import AlgProgram
from .solvers import (
    SolveResult,
    ceqv_exhaustive,
    ceqv_to_progcsat,
    ceqv_via_meet_irreducibles,
    csat_exhaustive,
    csat_to_progcsat,
    progcsat_exhaustive,
    progcsat_sample,
)


class UsageError(Exception):
    """Bad command-line input noticed after argument parsing."""


# ---------------------------------------------------------------------------
# Rendering helpers
# ---------------------------------------------------------------------------


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _blocks(part: Partition) -> list[list[int]]:
    return sorted(sorted(b) for b in part.blocks())


def _result_doc(res: SolveResult) -> dict:
    doc: dict = {"status": res.status, "tried": res.tried}
    if res.witness is not None:
        doc["witness"] = list(res.witness)
    if res.counterexample is not None:
        doc["counterexample"] = list(res.counterexample)
    if res.seed is not None:
        doc["seed"] = res.seed
    return doc


def _load_algcircuit(path: str) -> AlgCircuit:
    with open(path) as fh:
        return AlgCircuit.from_json(json.load(fh))


def _load_cnf(path: str) -> "object":
    with open(path) as fh:
        return parse_dimacs(fh.read())


def _scalar(value):
    """Open scalar SUMP outputs come back as 1-vectors; unwrap them."""
    if isinstance(value, tuple) and len(value) == 1:
        return value[0]
    return value


def _parse_word(text: str, width: int) -> tuple[int, ...]:
    if not text or any(c not in "01" for c in text):
        raise UsageError(f"word must be a nonempty 0/1 string, got {text!r}")
    if len(text) != width:
        raise UsageError(f"word has {len(text)} bits, circuit reads {width}")
    return tuple(int(c) for c in text)


def _lattice_dot(lat: CongruenceLattice) -> str:
    lines = ["digraph congruences {", "  rankdir=BT;"]
    for i, part in enumerate(lat.elements):
        label = " | ".join(
            ",".join(str(x) for x in b) for b in _blocks(part)
        )
        lines.append(f'  n{i} [label="{i}: {label}"];')
    for lo, hi in lat.covers:
        try:
            tag = str(lat.characteristic(lat.elements[lo], lat.elements[hi]))
        except ValueError:
            tag = "?"
        lines.append(f'  n{lo} -> n{hi} [label="{tag}"];')
    lines.append("}")
    return "\n".join(lines)


def _circuit_dot(circuit: CCircuit) -> str:
    lines = ["digraph circuit {", "  rankdir=BT;"]
    for i in range(circuit.inputs):
        lines.append(f'  n{i} [shape=box, label="x{i}"];')
    for gid, gate in enumerate(circuit.gates):
        node = circuit.inputs + gid
        if gate.kind == MOD:
            label = f"MOD({gate.m}) acc {sorted(gate.accepting)}"
        elif gate.kind in (SUMP, SUMPC):
            label = f"{gate.kind}({gate.p},{gate.nu})"
        else:
            label = gate.kind
        lines.append(f'  n{node} [label="{label} @{gate.layer}"];')
        for src, mult in gate.wires:
            attr = f' [label="x{mult}"]' if mult > 1 else ""
            lines.append(f"  n{src} -> n{node}{attr};")
    lines.append('  out [shape=plaintext, label="out"];')
    lines.append(f"  n{circuit.output} -> out;")
    lines.append("}")
    return "\n".join(lines)


def _difference_circuit(
    algebra: FiniteAlgebra, spec: str, budget
) -> AlgCircuit:
    malcev = resolve_malcev(spec)
    if malcev is None:
        malcev = find_malcev_polynomial(algebra, budget=budget)
    if malcev is None:
        raise HypothesisViolation(
            f"no ternary difference polynomial found for {algebra.name}"
        )
    return malcev


# ---------------------------------------------------------------------------
# The verification harness
# ---------------------------------------------------------------------------


def verify_harness(
    program: AlgProgram, circuit: CCircuit, n_bound: int = 20
) -> dict:
    """Exhaustive truth-table comparison of a program and a circuit.

    Word length must stay within ``n_bound`` (itself capped at 20); the
    first disagreeing word is reported in full.
    """
    if not 0 <= n_bound <= 20:
        raise UsageError("verification bound must lie in 0..20")
    if program.n > n_bound:
        raise ValueError(
            f"word length {program.n} exceeds the verification bound {n_bound}"
        )
    if circuit.inputs != program.n:
        return {
            "match": False,
            "reason": (
                f"circuit reads {circuit.inputs} bits,"
                f" program reads {program.n}"
            ),
        }
    for word in range(1 << program.n):
        bits = tuple((word >> i) & 1 for i in range(program.n))
        wants = program.accepts(bits)
        value = eval_cc(circuit, bits)
        if bool(value) != wants:
            return {
                "match": False,
                "reason": "truth tables differ",
                "word": list(bits),
                "program": wants,
                "circuit": int(value),
            }
    return {"match": True, "words": 1 << program.n}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_algebra(args) -> int:
    algebra = resolve_algebra(args.algebra)
    _emit(algebra.to_json())
    return 0


def _cmd_con(args) -> int:
    algebra = resolve_algebra(args.algebra)
    budget = default_budget()
    lat = all_congruences(algebra, budget=budget)
    if args.format == "dot":
        print(_lattice_dot(lat))
        return 0
    covers = []
    for lo, hi in lat.covers:
        try:
            tag: Optional[int] = lat.characteristic(
                lat.elements[lo], lat.elements[hi]
            )
        except ValueError:
            tag = None
        covers.append({"lower": lo, "upper": hi, "characteristic": tag})
    doc: dict = {
        "algebra": algebra.name,
        "elements": [
            {"index": i, "blocks": _blocks(part)}
            for i, part in enumerate(lat.elements)
        ],
        "covers": covers,
        "rank": supernilpotent_rank(algebra, lat),
    }
    try:
        dist = distinguished_congruences(algebra, lat)
        doc["distinguished"] = {
            "largest_supernilpotent": lat.index(dist.largest_supernilpotent),
            "smallest_supernilpotent_quotient": lat.index(
                dist.smallest_supernilpotent_quotient
            ),
            "by_prime": {
                str(p): lat.index(part) for p, part in dist.by_prime.items()
            },
        }
    except ValueError as exc:
        doc["distinguished"] = None
        doc["distinguished_error"] = str(exc)
    _emit(doc)
    return 0


def _cmd_localize(args) -> int:
    algebra = resolve_algebra(args.algebra)
    budget = default_budget()
    lat = all_congruences(algebra, budget=budget)
    count = len(lat.elements)
    if not (0 <= args.lower < count and 0 <= args.upper < count):
        raise UsageError(f"congruence indices must lie in 0..{count - 1}")
    lo = lat.elements[args.lower]
    hi = lat.elements[args.upper]
    if not (lo.leq(hi) and lo != hi):
        raise ValueError("--lower must be strictly below --upper")
    clone = UnaryClone(algebra, budget)
    found = minimal_sets(algebra, clone, lo, hi)
    doc = {
        "algebra": algebra.name,
        "pair": {"lower": args.lower, "upper": args.upper},
        "minimal_sets": [
            {
                "universe": sorted(ms.universe),
                "witness": list(ms.witness.values),
                "idempotent": (
                    list(ms.idempotent.values) if ms.idempotent else None
                ),
                "traces": [
                    sorted(t) for t in traces(algebra, ms.universe, lo, hi)
                ],
            }
            for ms in found
        ],
    }
    _emit(doc)
    return 0


def _cmd_compile(args) -> int:
    program = AlgProgram.load(args.program)
    budget = default_budget()
    lat = all_congruences(program.algebra, budget=budget)
    if is_supernilpotent_algebra(program.algebra, lat):
        circuit, report = compile_supernilpotent(program, budget)
        reports = [report]
    else:
        circuit, reports = compile_nilpotent(program, budget=budget)
    doc: dict = {
        "algebra": program.algebra.name,
        "n": program.n,
        "shape": shape_of(circuit),
        "gates": len(circuit.gates),
        "size": circuit.size,
        "passes": [asdict(r) for r in reports],
    }
    if args.trace_sizes:
        doc["size_trace"] = [
            [r.pass_name, r.input_size, r.output_size] for r in reports
        ]
    exit_code = 0
    if args.verify_n is not None:
        bound = min(args.verify_n, 20)
        if program.n <= bound:
            check = verify_harness(program, circuit, bound)
            doc["verified"] = check["match"]
            if not check["match"]:
                doc["mismatch"] = check
                exit_code = 1
        else:
            doc["verified"] = None
    if args.out:
        circuit.dump(args.out)
        doc["out"] = args.out
    else:
        doc["circuit"] = circuit.to_json()
    _emit(doc)
    return exit_code


_PASSES = {
    "modm_andd_to_sum": modm_andd_to_sum,
    "unmod": unmod,
    "collapse_5to3": collapse_5to3,
    "finalize_boolean_sum": finalize_boolean_sum,
}


def _cmd_lower(args) -> int:
    name = args.pass_name.replace("-", "_")
    if name not in _PASSES:
        raise UsageError(
            f"unknown pass {args.pass_name!r};"
            f" available: {', '.join(sorted(_PASSES))}"
        )
    circuit = CCircuit.load(args.infile)
    budget = default_budget()
    if name == "modm_andd_to_sum":
        if args.p is None:
            raise UsageError("pass modm_andd_to_sum needs --p <prime>")
        lowered, report = modm_andd_to_sum(circuit, args.p, budget)
    elif name == "finalize_boolean_sum":
        lowered = finalize_boolean_sum(circuit)
        report = None
    else:
        lowered, report = _PASSES[name](circuit, budget)
    doc: dict = {
        "pass": name,
        "input_shape": shape_of(circuit),
        "output_shape": shape_of(lowered),
        "input_size": circuit.size,
        "output_size": lowered.size,
    }
    if report is not None:
        doc["report"] = asdict(report)
    if args.verify_n is not None and circuit.inputs <= min(args.verify_n, 20):
        doc["reverified"] = [
            _scalar(v) for v in cc_truth_table(circuit)
        ] == [_scalar(v) for v in cc_truth_table(lowered)]
        if not doc["reverified"]:
            _emit(doc)
            return 1
    if args.out:
        lowered.dump(args.out)
        doc["out"] = args.out
    else:
        doc["circuit"] = lowered.to_json()
    _emit(doc)
    return 0


def _cmd_cceval(args) -> int:
    circuit = CCircuit.load(args.circuit)
    budget = default_budget()
    if args.word is not None:
        bits = _parse_word(args.word, circuit.inputs)
        value = eval_cc(circuit, bits)
        doc = {
            "output": list(value) if isinstance(value, tuple) else int(value)
        }
    else:
        charge(
            1 << circuit.inputs,
            1 << budget.truth_table_bits,
            "circuit truth table",
        )
        table = cc_truth_table(circuit)
        doc = {
            "inputs": circuit.inputs,
            "table": [
                list(v) if isinstance(v, tuple) else int(v) for v in table
            ],
        }
    _emit(doc)
    return 0


def _cmd_ccshape(args) -> int:
    circuit = CCircuit.load(args.circuit)
    if args.format == "dot":
        print(_circuit_dot(circuit))
        return 0
    ok, problems = validate_shape(circuit, args.shape)
    doc = {
        "shape": shape_of(circuit),
        "declared_shape": circuit.declared_shape,
        "valid": ok,
        "problems": problems,
    }
    _emit(doc)
    return 0


def _cmd_solve_progcsat(args) -> int:
    program = AlgProgram.load(args.program)
    if args.sample is not None:
        trials = args.sample if args.sample > 0 else None
        res = progcsat_sample(program, trials=trials, seed=args.seed)
    else:
        res = progcsat_exhaustive(program, default_budget())
    _emit(_result_doc(res))
    return 0


def _cmd_solve_csat(args) -> int:
    algebra = resolve_algebra(args.algebra)
    circuit = _load_algcircuit(args.circuit)
    budget = default_budget()
    if args.strategy == "reduce":
        malcev = _difference_circuit(algebra, args.algebra, budget)
        program = csat_to_progcsat(algebra, malcev, circuit, args.e)
        res = progcsat_exhaustive(program, budget)
        doc = _result_doc(res)
        doc["level"] = "program"
    else:
        res = csat_exhaustive(algebra, circuit, args.e, budget)
        doc = _result_doc(res)
    _emit(doc)
    return 0


def _cmd_solve_ceqv(args) -> int:
    algebra = resolve_algebra(args.algebra)
    circuit = _load_algcircuit(args.circuit)
    budget = default_budget()
    if args.strategy == "reduce":
        malcev = _difference_circuit(algebra, args.algebra, budget)
        program = ceqv_to_progcsat(algebra, malcev, circuit, args.e)
        res = progcsat_exhaustive(program, budget)
        doc = {
            "status": "holds" if res.status == "unsat" else "fails",
            "tried": res.tried,
            "level": "program",
        }
        if res.witness is not None:
            doc["program_word"] = list(res.witness)
    elif args.strategy == "meet":
        res = ceqv_via_meet_irreducibles(algebra, circuit, args.e, budget=budget)
        doc = _result_doc(res)
    else:
        res = ceqv_exhaustive(algebra, circuit, args.e, budget)
        doc = _result_doc(res)
    _emit(doc)
    return 0


def _cmd_gadget_lattice(args) -> int:
    cnf = _load_cnf(args.cnf)
    program = cnf_to_lattice_program(cnf)
    doc: dict = {
        "gadget": "lattice",
        "cnf_vars": cnf.num_vars,
        "clauses": len(cnf.clauses),
        "n": program.n,
        "size": program.size,
    }
    if args.out:
        program.dump(args.out)
        doc["out"] = args.out
    else:
        doc["program"] = program.to_json()
    _emit(doc)
    return 0


def _cmd_gadget_twoprime(args) -> int:
    algebra = resolve_algebra(args.algebra)
    budget = default_budget()
    malcev = resolve_malcev(args.algebra)
    witness = find_two_prime_witness(algebra, malcev, budget=budget)
    if isinstance(witness, WitnessFailure):
        _emit(
            {
                "error": {
                    "stage": witness.stage,
                    "detail": witness.detail,
                },
                "kind": "witness-failure",
            }
        )
        return 1
    cnf = _load_cnf(args.cnf)
    program = build_two_prime_program(algebra, witness, cnf, budget=budget)
    doc: dict = {
        "gadget": "twoprime",
        "algebra": algebra.name,
        "primes": sorted(side.q for side in witness.sides),
        "cnf_vars": cnf.num_vars,
        "clauses": len(cnf.clauses),
        "n": program.n,
        "size": program.size,
    }
    if args.out:
        program.dump(args.out)
        doc["out"] = args.out
    else:
        doc["program"] = program.to_json()
    _emit(doc)
    return 0


def _cmd_verify(args) -> int:
    program = AlgProgram.load(args.program)
    circuit = CCircuit.load(args.circuit)
    doc = verify_harness(program, circuit, args.n_bound)
    _emit(doc)
    return 0 if doc["match"] else 1


def _cmd_fixtures(args) -> int:
    if args.demo:
        program = demo_program(args.demo)
        doc: dict = {
            "demo": args.demo,
            "algebra": program.algebra.name,
            "n": program.n,
            "size": program.size,
        }
        if args.out:
            program.dump(args.out)
            doc["out"] = args.out
        else:
            doc["program"] = program.to_json()
        _emit(doc)
        return 0
    listing = []
    for name in fixture_names():
        fix = get_fixture(name)
        listing.append(
            {
                "name": name,
                "size": fix.algebra.size,
                "ops": [op.name for op in fix.algebra.ops],
                "congruences": fix.congruence_count,
                "difference_circuit": fix.malcev is not None,
                "description": fix.description,
            }
        )
    _emit({"fixtures": listing, "demos": demo_names()})
    return 0


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nudfa",
        description=(
            "Programs over finite algebras: congruence analysis,"
            " compilation to modular-counting circuits, and the"
            " satisfiability gadgets around them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("algebra", help="print an algebra's operation tables")
    p.add_argument("--algebra", required=True, metavar="SPEC")
    p.set_defaults(func=_cmd_algebra)

    p = sub.add_parser("con", help="congruence lattice with landmarks")
    p.add_argument("--algebra", required=True, metavar="SPEC")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=_cmd_con)

    p = sub.add_parser("localize", help="minimal sets and traces of a pair")
    p.add_argument("--algebra", required=True, metavar="SPEC")
    p.add_argument("--lower", type=int, required=True, metavar="INDEX")
    p.add_argument("--upper", type=int, required=True, metavar="INDEX")
    p.set_defaults(func=_cmd_localize)

    p = sub.add_parser("compile", help="program -> modular circuit")
    p.add_argument("--program", required=True, metavar="FILE")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--verify-n", type=int, dest="verify_n", metavar="K")
    p.add_argument("--trace-sizes", action="store_true", dest="trace_sizes")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("lower", help="run one lowering pass")
    p.add_argument("--pass", required=True, dest="pass_name", metavar="NAME")
    p.add_argument("--in", required=True, dest="infile", metavar="FILE")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--p", type=int, metavar="PRIME")
    p.add_argument("--verify-n", type=int, dest="verify_n", metavar="K")
    p.set_defaults(func=_cmd_lower)

    p = sub.add_parser("cceval", help="evaluate a modular circuit")
    p.add_argument("--circuit", required=True, metavar="FILE")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--word", metavar="BITS")
    group.add_argument("--table", action="store_true")
    p.set_defaults(func=_cmd_cceval)

    p = sub.add_parser("ccshape", help="validate a circuit's layer shape")
    p.add_argument("--circuit", required=True, metavar="FILE")
    p.add_argument("--shape", metavar="SHAPE")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=_cmd_ccshape)

    p = sub.add_parser("solve", help="decision procedures")
    ssub = p.add_subparsers(dest="problem", required=True)

    q = ssub.add_parser("progcsat", help="does the program accept a word?")
    q.add_argument("--program", required=True, metavar="FILE")
    q.add_argument("--exhaustive", action="store_true")
    q.add_argument(
        "--sample",
        type=int,
        nargs="?",
        const=0,
        metavar="TRIALS",
        help="randomized search (default trials: 4 * size^2)",
    )
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=_cmd_solve_progcsat)

    q = ssub.add_parser("csat", help="is the equation solvable?")
    q.add_argument("--algebra", required=True, metavar="SPEC")
    q.add_argument("--circuit", required=True, metavar="FILE")
    q.add_argument("--e", type=int, default=0, metavar="ELEMENT")
    q.add_argument("--strategy", choices=("scan", "reduce"), default="scan")
    q.set_defaults(func=_cmd_solve_csat)

    q = ssub.add_parser("ceqv", help="does the equation hold identically?")
    q.add_argument("--algebra", required=True, metavar="SPEC")
    q.add_argument("--circuit", required=True, metavar="FILE")
    q.add_argument("--e", type=int, default=0, metavar="ELEMENT")
    q.add_argument(
        "--strategy", choices=("scan", "meet", "reduce"), default="scan"
    )
    q.set_defaults(func=_cmd_solve_ceqv)

    p = sub.add_parser("gadget", help="CNF satisfiability gadgets")
    gsub = p.add_subparsers(dest="gadget", required=True)

    q = gsub.add_parser("lattice", help="CNF -> program over the 2-lattice")
    q.add_argument("--cnf", required=True, metavar="FILE")
    q.add_argument("--out", metavar="FILE")
    q.set_defaults(func=_cmd_gadget_lattice)

    q = gsub.add_parser(
        "twoprime", help="CNF -> program via the two-prime construction"
    )
    q.add_argument("--algebra", required=True, metavar="SPEC")
    q.add_argument("--cnf", required=True, metavar="FILE")
    q.add_argument("--out", metavar="FILE")
    q.set_defaults(func=_cmd_gadget_twoprime)

    p = sub.add_parser("verify", help="compare a program against a circuit")
    p.add_argument("--program", required=True, metavar="FILE")
    p.add_argument("--circuit", required=True, metavar="FILE")
    p.add_argument("--n-bound", type=int, default=20, dest="n_bound")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("fixtures", help="list built-ins or dump a demo")
    p.add_argument("--demo", metavar="NAME")
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=_cmd_fixtures)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _emit({"error": str(exc), "kind": "usage"})
        return 2
    except (HypothesisViolation, BudgetExceeded, GadgetSearchError) as exc:
        _emit({"error": str(exc), "kind": type(exc).__name__})
        return 1
    except ValueError as exc:
        _emit({"error": str(exc), "kind": "domain"})
        return 1
    except KeyError as exc:
        msg = str(exc.args[0]) if exc.args else str(exc)
        _emit({"error": msg, "kind": "usage"})
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        _emit({"error": str(exc), "kind": "io"})
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
