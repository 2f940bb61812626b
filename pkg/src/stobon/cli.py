"""Command-line interface.

Exit codes: 0 success, 1 a checked formula or assertion is false, 2 usage
error, 3 domain error (collapse, untruthful announcement, guard limits).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .checker import holds, info_content, subjective_probability
from .errors import DomainError, ParseError
from .formula import GRAMMAR, parse, render
from .kripke import MODEL_SCHEMA, PointedModel, load_model
from .village import (
    CHECK_T_MAX_N,
    OutcomeKind,
    ScenarioSpec,
    announce,
    at_least_one,
    build_village,
    check_S,
    check_T,
    ProtocolState,
    run_protocol,
    run_protocol_fast,
)

log = logging.getLogger("stobon")

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _men_list(text: str) -> frozenset[int]:
    if not text.strip():
        return frozenset()
    try:
        return frozenset(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated man numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stobon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="print details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the day-by-day protocol")
    sim.add_argument("--men", type=int, required=True)
    sim.add_argument("--unfaithful", type=_men_list, required=True, help="e.g. 1,3,4")
    sim.add_argument("--deviant", type=_men_list, default=frozenset(), help="wives who refuse to kill")
    sim.add_argument("--engine", choices=("exact", "fast"), default="exact")
    sim.add_argument("--max-mornings", type=int)
    sim.add_argument("--format", choices=("table", "json"), default="table")

    def model_source(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--village", type=int, metavar="N")
        src.add_argument("--model", metavar="FILE")
        p.add_argument("--unfaithful", type=_men_list, default=frozenset())
        p.add_argument("--post-oracle", action="store_true", help="announce at_least_one first")
        p.add_argument("--format", choices=("table", "json"), default="table")

    chk = sub.add_parser("check", help="evaluate a formula at the actual world")
    chk.add_argument("--formula", required=True)
    model_source(chk)

    info = sub.add_parser("info", help="subjective probability and information content")
    info.add_argument("--agent", required=True)
    info.add_argument("--formula", required=True)
    model_source(info)

    ver = sub.add_parser("verify", help="sweep an assertion over all 1 <= k <= n <= max-n")
    ver.add_argument("--assertion", choices=("S", "T"), required=True)
    ver.add_argument("--max-n", type=int, default=10)

    sub.add_parser("grammar", help="print the formula grammar")
    sub.add_parser("schema", help="print the model file JSON schema")
    return parser


def _pointed(args) -> PointedModel:
    if args.model is not None:
        if args.post_oracle or args.unfaithful:
            raise UsageError("--post-oracle and --unfaithful only apply to --village")
        return load_model(args.model)
    pm = build_village(args.village, args.unfaithful)
    if args.post_oracle:
        pm = announce(ProtocolState(pm), at_least_one(args.village)).pointed
    return pm


def _simulate(args, out) -> int:
    spec = ScenarioSpec(args.men, args.unfaithful, args.deviant, args.max_mornings)
    engine = run_protocol_fast if args.engine == "fast" else run_protocol
    trace = engine(spec)
    out.write((trace.to_json() if args.format == "json" else trace.table()) + "\n")
    if trace.outcome.kind is OutcomeKind.COLLAPSED:
        print(
            f"stobon: {trace.outcome}: the public history contradicts every remaining world",
            file=sys.stderr,
        )
        return EXIT_DOMAIN
    if trace.outcome.kind is OutcomeKind.MORNING_LIMIT_REACHED:
        print(f"stobon: no killings within {spec.max_mornings} mornings", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def _check(args, out) -> int:
    f = parse(args.formula)
    pm = _pointed(args)
    result = holds(pm, f)
    if args.format == "json":
        out.write(json.dumps({"formula": render(f), "holds": result}) + "\n")
    else:
        out.write(("true" if result else "false") + "\n")
    return EXIT_OK if result else EXIT_FALSE


def _info(args, out) -> int:
    f = parse(args.formula)
    pm = _pointed(args)
    p = subjective_probability(pm, args.agent, f)
    bits = info_content(p)
    if args.format == "json":
        doc = {"agent": args.agent, "formula": render(f), "probability": str(p), "bits": bits.to_json()}
        out.write(json.dumps(doc) + "\n")
    else:
        out.write(f"p = {p}\nbits = {bits}\n")
    return EXIT_OK


def _verify(args, out) -> int:
    checker = check_S if args.assertion == "S" else check_T
    if args.max_n < 1:
        raise UsageError("--max-n must be at least 1")
    if args.assertion == "T" and args.max_n > CHECK_T_MAX_N:
        raise DomainError(f"T is checked for n <= {CHECK_T_MAX_N}")
    failures = 0
    for n in range(1, args.max_n + 1):
        for k in range(1, n + 1):
            report = checker(n, k)
            for line in report.details:
                log.info(line)
            if not report.holds:
                failures += 1
                for line in report.details:
                    out.write(f"FAIL {line}\n")
    if failures:
        out.write(f"{args.assertion} fails in {failures} case(s) with n <= {args.max_n}\n")
        return EXIT_FALSE
    out.write(f"{args.assertion} holds for all 1≤k≤n≤{args.max_n}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    # traces of very large fast-engine villages carry world counts with many digits
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    try:
        if args.command == "simulate":
            return _simulate(args, out)
        if args.command == "check":
            return _check(args, out)
        if args.command == "info":
            return _info(args, out)
        if args.command == "verify":
            return _verify(args, out)
        if args.command == "grammar":
            out.write(GRAMMAR)
            return EXIT_OK
        if args.command == "schema":
            out.write(json.dumps(MODEL_SCHEMA, indent=2) + "\n")
            return EXIT_OK
    except (UsageError, ParseError) as exc:
        print(f"stobon: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"stobon: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
