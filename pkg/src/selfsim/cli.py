"""Command-line front end.

Every subcommand prints one JSON document on stdout.  Rationals are
written as strings (``"4/7"``) so that nothing passes through a float.

Exit codes: 0 success, 1 usage or parse error, 2 inconclusive or
overflow, 3 an internal check failed.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from selfsim import kernels, kms
from selfsim.action import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_MAX_ELEMS,
    Overflow,
    SelfSimError,
    Undecided,
    act_and_restrict,
    exact_equal,
)
from selfsim.algebra import FormalCombination, ParseError, multiply, parse_combination, parse_element, s, s_star, u
from selfsim.counting import (
    LINEAR_SOLVE,
    BudgetExceeded,
    brute_force_counts,
    counts,
    critical_limit_bounds,
    critical_value,
)
from selfsim.mealy import MealyAction, basilica, grigorchuk, load_machine, odometer
from selfsim.moore import build_diagram, dot_export, nucleus, stationary_subgraph
from selfsim.zd import load_zd

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INVARIANT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def q(x) -> str:
    return str(Fraction(x))


# loading ------------------------------------------------------------------

def load_action_document(document):
    """Build a backend from an action document.

    Accepted shapes: ``{"mealy": {...}}`` or ``{"zd": {...}}`` (exactly
    one), a bare machine document, or a bare ``{"type": "zd", ...}``
    document.  ``name`` and ``caps`` may sit next to either.
    Returns ``(backend, caps)``.
    """
    if isinstance(document, (str, Path)):
        document = json.loads(Path(document).read_text(encoding="utf-8"))
    if not isinstance(document, dict):
        raise UsageError("action document must be a JSON object")
    document = dict(document)
    name = document.pop("name", "")
    caps = document.pop("caps", {}) or {}
    unknown_caps = set(caps) - {"max_elems", "max_depth"}
    if unknown_caps:
        raise UsageError(f"unknown caps {sorted(unknown_caps)}")
    keys = {"mealy", "zd"} & set(document)
    if len(keys) > 1:
        raise UsageError("action document has both 'mealy' and 'zd'")
    if keys:
        (key,) = keys
        if set(document) != {key}:
            raise UsageError(f"unexpected keys next to {key!r}: {sorted(set(document) - {key})}")
        body = document[key]
        if key == "zd":
            backend = load_zd({"type": "zd", **body, **({"name": name} if name else {})})
        else:
            backend = MealyAction(load_machine(body), name=name)
    elif document.get("type") == "zd":
        if name:
            document["name"] = name
        backend = load_zd(document)
    else:
        if document.get("type") == "mealy":
            del document["type"]
        backend = MealyAction(load_machine(document), name=name)
    return backend, caps


def _backend(args):
    if args.builtin and args.action:
        raise UsageError("give either --builtin or --action, not both")
    caps = {}
    if args.builtin == "odometer":
        if args.n < 2:
            raise UsageError("--n must be at least 2")
        backend = odometer(args.n)
    elif args.builtin == "basilica":
        backend = basilica()
    elif args.builtin == "grigorchuk":
        backend = grigorchuk()
    elif args.action:
        backend, caps = load_action_document(args.action)
    else:
        raise UsageError("one of --builtin or --action is required")
    max_elems = args.max_elems if args.max_elems is not None else caps.get("max_elems", DEFAULT_MAX_ELEMS)
    max_depth = args.max_depth if args.max_depth is not None else caps.get("max_depth", DEFAULT_MAX_DEPTH)
    return backend, {"max_elems": max_elems, "max_depth": max_depth}


def _element(args, backend):
    if not args.element:
        raise UsageError("--element is required")
    return parse_element(args.element, backend)


# subcommands --------------------------------------------------------------

def cmd_nucleus(args, backend, caps):
    result = nucleus(backend, max_elems=caps["max_elems"], max_depth=caps["max_depth"])
    doc = {
        "action": backend.name,
        "status": result.status,
        "elements": [g.name for g in result.elements],
        "certificate": {f"{g}*{h}": d for (g, h), d in sorted(result.certificate.items())},
        "max_contraction_depth": result.max_depth,
        "iterations": result.iterations,
    }
    if result.message:
        doc["message"] = result.message
    return doc, EXIT_OK if result.verified else EXIT_INCONCLUSIVE


def cmd_moore(args, backend, caps):
    if args.element:
        elements = [parse_element(t, backend) for t in args.element.split(",")]
    else:
        result = nucleus(backend, max_elems=caps["max_elems"], max_depth=caps["max_depth"])
        if not result.verified:
            return {"status": result.status, "message": result.message}, EXIT_INCONCLUSIVE
        elements = result.elements
    diagram = build_diagram(elements, max_elems=caps["max_elems"])
    text = dot_export(diagram, highlight_stationary=args.highlight_stationary)
    if args.dot:
        Path(args.dot).write_text(text, encoding="utf-8")
    doc = {
        "vertices": diagram.names,
        "edges": len(diagram.edges),
        "stationary_edges": len(stationary_subgraph(diagram).edges),
    }
    if args.dot:
        doc["dot"] = args.dot
    else:
        doc["dot_source"] = text
    return doc, EXIT_OK


def cmd_count(args, backend, caps):
    g = _element(args, backend)
    k = args.k
    if k < 0:
        raise UsageError("--k must be non-negative")
    fixed, trivial = counts(g, k)
    doc = {"element": g.name, "k": k, "G": fixed, "F": trivial}
    code = EXIT_OK
    if args.oracle:
        o_fixed, o_trivial = brute_force_counts(g, k)
        agree = (o_fixed, o_trivial) == (fixed, trivial)
        doc["oracle"] = {"G": o_fixed, "F": o_trivial, "agree": agree, "kernels": kernels.BACKEND}
        if not agree:
            code = EXIT_INVARIANT
    return doc, code


def cmd_cg(args, backend, caps):
    g = _element(args, backend)
    value = critical_value(g, max_elems=caps["max_elems"])
    doc = {"element": g.name, "c": q(value), "method": LINEAR_SOLVE}
    code = EXIT_OK
    if args.bounds is not None:
        lower, upper = critical_limit_bounds(g, args.bounds)
        doc["bounds"] = {"k": args.bounds, "lower": q(lower), "upper": q(upper)}
        if not lower <= value <= upper:
            code = EXIT_INVARIANT
    return doc, code


def _trace(name):
    return {"dirac": kms.dirac_trace, "trivial": kms.trivial_trace, "critical": kms.critical_trace}[name]()


def cmd_kms(args, backend, caps):
    modes = [args.r is not None, args.critical, args.ground]
    if sum(modes) != 1:
        raise UsageError("give exactly one of --r, --critical, --ground")
    if not args.term:
        raise UsageError("--term is required")
    trace = _trace(args.trace)
    if args.critical:
        state = kms.CriticalState(backend)
        label = {"state": "critical", "r": q(state.r)}
    elif args.ground:
        state = kms.GroundState(trace, trace.name)
        label = {"state": "ground", "omega": trace.name}
    else:
        state = kms.GibbsState(args.r, trace)
        kms._check_r(backend, args.r)
        label = {"state": "gibbs", "r": q(args.r), "trace": trace.name}
    combination = parse_combination(args.term, backend)
    doc = {**label, "term": combination.format(), "value": q(state(combination))}
    code = EXIT_OK
    if args.check:
        rng = random.Random(args.seed)
        if args.ground:
            report = kms.ground_check(state, kms.sample_terms(backend, args.check, rng))
        else:
            report = kms.kms_check(state, state.r, kms.sample_pairs(backend, args.check, rng), jobs=args.jobs)
        doc["checks"] = {report.name: {"checked": report.checked, "passed": report.passed}}
        if not report.ok:
            doc["checks"][report.name]["failures"] = [
                {k: (q(v) if isinstance(v, Fraction) else v) for k, v in f.items()} for f in report.failures[:5]
            ]
            code = EXIT_INVARIANT
    return doc, code


def _relation_checks(backend):
    """The defining relations of the Toeplitz algebra on generators and letters."""
    letters = range(backend.alphabet.size)
    gens = backend.default_generators()
    gens = gens + [g.inverse() for g in gens]
    checked = failed = 0
    for x in letters:
        for y in letters:
            lhs = multiply(s_star(backend, (x,)), s(backend, (y,)))
            rhs = FormalCombination.unit(backend) if x == y else FormalCombination.zero(backend)
            checked += 1
            failed += lhs != rhs
    for g in gens:
        for h in gens:
            checked += 1
            failed += multiply(u(g), u(h)) != u(g * h)
        for x in letters:
            (y,), r = act_and_restrict(g, (x,))
            checked += 1
            failed += multiply(u(g), s(backend, (x,))) != multiply(s(backend, (y,)), u(r))
    return checked, failed


def cmd_relations(args, backend, caps):
    doc = {}
    code = EXIT_OK
    if args.eq:
        results = []
        for text in args.eq:
            if "=" not in text:
                raise UsageError(f"relation {text!r} needs '='")
            left, right = text.split("=", 1)
            g, h = parse_element(left, backend), parse_element(right, backend)
            try:
                verdict = exact_equal(g, h)
            except Undecided as exc:
                results.append({"relation": text, "holds": None, "message": str(exc)})
                code = EXIT_INCONCLUSIVE
                continue
            results.append({"relation": text, "holds": verdict})
        doc["relations"] = results
    else:
        checked, failed = _relation_checks(backend)
        doc["presentation"] = {"checked": checked, "passed": checked - failed}
        if failed:
            code = EXIT_INVARIANT
    return doc, code


COMMANDS = {
    "nucleus": cmd_nucleus,
    "moore": cmd_moore,
    "count": cmd_count,
    "cg": cmd_cg,
    "kms": cmd_kms,
    "relations": cmd_relations,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--builtin", choices=["odometer", "basilica", "grigorchuk"])
    common.add_argument("--action", metavar="FILE.json")
    common.add_argument("--n", type=int, default=2, help="alphabet size of the odometer")
    common.add_argument("--max-depth", type=int, default=None)
    common.add_argument("--max-elems", type=int, default=None)
    common.add_argument("--jobs", type=int, default=1, help="worker threads for the KMS checker")

    parser = _Parser(prog="selfsim", description="Exact computations for self-similar actions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("nucleus", parents=[common], help="compute and certify the nucleus")

    p = sub.add_parser("moore", parents=[common], help="Moore diagram as DOT")
    p.add_argument("--dot", metavar="FILE")
    p.add_argument("--highlight-stationary", action="store_true")
    p.add_argument("--element", help="comma-separated elements (default: the nucleus)")

    p = sub.add_parser("count", parents=[common], help="count fixed words")
    p.add_argument("--element", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also enumerate all words")

    p = sub.add_parser("cg", parents=[common], help="critical value c_g")
    p.add_argument("--element", required=True)
    p.add_argument("--bounds", type=int, metavar="K")

    p = sub.add_parser("kms", parents=[common], help="evaluate a KMS state on a term")
    p.add_argument("--r", type=_rational)
    p.add_argument("--critical", action="store_true")
    p.add_argument("--ground", action="store_true")
    p.add_argument("--trace", choices=["dirac", "trivial", "critical"], default="dirac")
    p.add_argument("--term")
    p.add_argument("--check", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("relations", parents=[common], help="decide group relations")
    p.add_argument("--eq", action="append", metavar="LHS=RHS")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        backend, caps = _backend(args)
        doc, code = COMMANDS[args.command](args, backend, caps)
    except (UsageError, ParseError, json.JSONDecodeError, OSError) as exc:
        print(f"selfsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Overflow, Undecided, BudgetExceeded) as exc:
        print(f"selfsim: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except kms.NoKmsState as exc:
        print(f"selfsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SelfSimError as exc:
        print(f"selfsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(doc, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
