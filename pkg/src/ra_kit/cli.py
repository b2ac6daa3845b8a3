"""Command-line interface.

Exit codes: 0 positive verdict (valid / satisfiable / YES), 1 negative
verdict (UNSAT / NO / violations found), 2 usage or parse error, 3 resource
budget exceeded.  With ``--machine`` a single JSON document is printed
instead of the human output; both modes always agree on the verdict, and
identical inputs (same flags, same seed) produce byte-identical output.
The environment variable RA_KIT_BUDGET overrides the default diagram
budget of the ``amalgamation`` command; ``--budget`` overrides both.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import amalgamation as am
from .algebra import RelationAlgebra, format_algebra, parse_algebra, validate_algebra
from .bounds import format_bounds, generate_bounds
from .network import (
    Network,
    format_network,
    is_atomic,
    normalize,
    parse_network,
    path_consistency,
    refine_solve,
)
from .parsing import ParseError
from .representation import (
    derive_algebra,
    model_check,
    parse_representation,
    validate_representation,
)

EXIT_POSITIVE = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ra-kit",
        description="Finite relation algebras: validation, solving, amalgamation.",
    )
    parser.add_argument(
        "--machine", action="store_true", help="emit one JSON document instead of text"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the algebra laws")
    p.add_argument("algebra")

    p = sub.add_parser("compose", help="compose two elements")
    p.add_argument("algebra")
    p.add_argument("x", help="comma-separated atom list, or 0")
    p.add_argument("y", help="comma-separated atom list, or 0")

    p = sub.add_parser("pc", help="normalize and run path consistency")
    p.add_argument("algebra")
    p.add_argument("network")

    p = sub.add_parser("solve", help="search for an atomic refinement")
    p.add_argument("algebra")
    p.add_argument("network")

    p = sub.add_parser("atomic", help="check whether the network is atomic")
    p.add_argument("algebra")
    p.add_argument("network")

    p = sub.add_parser("amalgamation", help="decide the amalgamation property")
    p.add_argument("algebra")
    p.add_argument("--witness", action="store_true", help="write the failing diagram")
    p.add_argument("--out-dir", default=".", help="directory for witness files")
    p.add_argument("--max-base", type=int, default=None, help="override the base bound")
    p.add_argument("--budget", type=int, default=None, help="diagram budget")
    p.add_argument("--workers", type=int, default=1, help="parallel diagram checking")

    p = sub.add_parser("bounds", help="generate the forbidden-substructure bounds")
    p.add_argument("algebra")

    p = sub.add_parser("modelcheck", help="satisfiability in a finite representation")
    p.add_argument("representation")
    p.add_argument("network")

    p = sub.add_parser("derive", help="derive the abstract algebra of a representation")
    p.add_argument("representation")

    p = sub.add_parser("grow", help="grow a random atomic network")
    p.add_argument("algebra")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _load_algebra(path: str) -> RelationAlgebra:
    return parse_algebra(Path(path).read_text(encoding="utf-8"))


def _load_network(ra: RelationAlgebra, path: str) -> Network:
    return parse_network(ra, Path(path).read_text(encoding="utf-8"))


def _element_str(ra: RelationAlgebra, mask: int) -> str:
    names = ra.atom_names(mask)
    return ",".join(names) if names else "0"


def _run(args) -> tuple[int, str, list[str], dict, list[str]]:
    """Execute a command; returns (exit, verdict, lines, counters, witness files)."""
    cmd = args.command
    if cmd == "validate":
        ra = _load_algebra(args.algebra)
        report = validate_algebra(ra)
        lines = [f"violation: {v}" for v in report.violations]
        lines += [f"warning: {v}" for v in report.warnings]
        counters = {
            "violations": len(report.violations),
            "warnings": len(report.warnings),
        }
        if report.ok:
            return EXIT_POSITIVE, "VALID", lines + ["VALID"], counters, []
        return EXIT_NEGATIVE, "INVALID", lines + ["INVALID"], counters, []

    if cmd == "compose":
        ra = _load_algebra(args.algebra)
        x = ra.element(args.x)
        y = ra.element(args.y)
        return EXIT_POSITIVE, "OK", [_element_str(ra, ra.compose(x, y))], {}, []

    if cmd == "pc":
        ra = _load_algebra(args.algebra)
        net = _load_network(ra, args.network)
        stats: dict = {"revisions": 0}
        normalized = normalize(ra, net)
        refined = (
            None if normalized is None else path_consistency(ra, normalized, stats)
        )
        if refined is None:
            return EXIT_NEGATIVE, "INCONSISTENT", ["INCONSISTENT"], stats, []
        lines = format_network(ra, refined).rstrip("\n").split("\n")
        return EXIT_POSITIVE, "CONSISTENT", lines + ["CONSISTENT"], stats, []

    if cmd == "solve":
        ra = _load_algebra(args.algebra)
        net = _load_network(ra, args.network)
        stats = {}
        witness = refine_solve(ra, net, stats)
        if witness is None:
            return EXIT_NEGATIVE, "UNSAT", ["UNSAT"], stats, []
        lines = format_network(ra, witness).rstrip("\n").split("\n")
        return EXIT_POSITIVE, "SAT", lines + ["SAT"], stats, []

    if cmd == "atomic":
        ra = _load_algebra(args.algebra)
        net = _load_network(ra, args.network)
        if is_atomic(ra, net):
            return EXIT_POSITIVE, "ATOMIC", ["ATOMIC"], {}, []
        return EXIT_NEGATIVE, "NOT_ATOMIC", ["NOT_ATOMIC"], {}, []

    if cmd == "amalgamation":
        ra = _load_algebra(args.algebra)
        budget = args.budget
        if budget is None:
            budget = int(os.environ.get("RA_KIT_BUDGET", am.DEFAULT_BUDGET))
        result = am.decide_amalgamation_property(
            ra, max_base_size=args.max_base, budget=budget, workers=args.workers
        )
        counters = {"diagrams_checked": result.diagrams_checked}
        if result.verdict == "YES":
            return EXIT_POSITIVE, "YES", ["YES"], counters, []
        if result.verdict == "INDETERMINATE":
            return EXIT_BUDGET, "INDETERMINATE", ["INDETERMINATE"], counters, []
        d = result.witness
        lines = [
            f"NO: base {len(d.base.nodes)} nodes, diagram "
            f"{len(d.base.nodes) + 2} nodes"
        ]
        blocked = "; ".join(
            f"{atom} violates ({x},{y},{z})"
            for atom, (x, y, z) in am.explain_failure(ra, d)
        )
        lines.append(
            f"no amalgam for ({d.left_node},{d.right_node}): {blocked}"
        )
        files: list[str] = []
        if args.witness:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            for part, net in (("base", d.base), ("left", d.left), ("right", d.right)):
                path = out / f"{ra.name}_witness_{part}.net"
                path.write_text(format_network(ra, net), encoding="utf-8")
                files.append(str(path))
            lines += [f"witness: {f}" for f in files]
        return EXIT_NEGATIVE, "NO", lines + ["NO"], counters, files

    if cmd == "bounds":
        ra = _load_algebra(args.algebra)
        bs = generate_bounds(ra)
        counters = {
            "F1": len(bs.family("F1")),
            "F2": len(bs.family("F2")),
            "F3": len(bs.family("F3")),
        }
        lines = format_bounds(ra, bs).rstrip("\n").split("\n")
        return EXIT_POSITIVE, "OK", lines, counters, []

    if cmd == "modelcheck":
        cr = parse_representation(Path(args.representation).read_text(encoding="utf-8"))
        report = validate_representation(cr)
        if not report.ok:
            lines = [f"violation: {v}" for v in report.violations]
            counters = {"violations": len(report.violations)}
            return EXIT_NEGATIVE, "INVALID", lines + ["INVALID"], counters, []
        ra = derive_algebra(cr)
        net = _load_network(ra, args.network)
        stats = {}
        assignment = model_check(cr, net, stats)
        if assignment is None:
            return EXIT_NEGATIVE, "UNSAT", ["UNSAT"], stats, []
        lines = [f"s({node}) = {assignment[node]}" for node in net.nodes]
        return EXIT_POSITIVE, "SAT", lines + ["SAT"], stats, []

    if cmd == "derive":
        cr = parse_representation(Path(args.representation).read_text(encoding="utf-8"))
        report = validate_representation(cr)
        if not report.ok:
            lines = [f"violation: {v}" for v in report.violations]
            counters = {"violations": len(report.violations)}
            return EXIT_NEGATIVE, "INVALID", lines + ["INVALID"], counters, []
        ra = derive_algebra(cr)
        lines = format_algebra(ra).rstrip("\n").split("\n")
        return EXIT_POSITIVE, "OK", lines, {}, []

    if cmd == "grow":
        ra = _load_algebra(args.algebra)
        try:
            net = am.grow_limit(ra, args.size, args.seed)
        except am.ExtensionFailedError as exc:
            return EXIT_NEGATIVE, "EXTENSION_FAILED", [f"EXTENSION_FAILED: {exc}"], {}, []
        lines = format_network(ra, net).rstrip("\n").split("\n")
        return EXIT_POSITIVE, "OK", lines, {"nodes": len(net.nodes)}, []

    raise AssertionError(f"unhandled command {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_POSITIVE if exc.code in (0, None) else EXIT_USAGE

    try:
        code, verdict, lines, counters, witness_files = _run(args)
    except ParseError as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.machine:
        doc = {
            "command": args.command,
            "verdict": verdict,
            "exit_code": code,
            "counters": counters,
            "witness_files": witness_files,
            "output_lines": lines,
        }
        print(json.dumps(doc, sort_keys=True))
    else:
        for line in lines:
            print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
