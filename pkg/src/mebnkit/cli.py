"""Command-line front end.

Commands::

    mebnkit validate <model>
    mebnkit infer --model <path> --findings <path> --query <text>
                  [--engine ve|enumerate] [--dump-ssbn <path>]
                  [--format dot|json] [--verbose]

Results go to stdout, diagnostics and warnings to stderr.  Exit codes:
0 success, 1 I/O error, 2 parse/usage error, 3 grounding or validation
error, 4 inference error.  Posteriors print one ``<state> <probability>``
line per state in declared state order with six decimals (always a
``.`` decimal separator, regardless of locale).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .dsl import parse_findings, parse_model, parse_query
from .errors import (
    GroundingError,
    InferenceError,
    MebnError,
    ParseError,
    UnknownFunctorError,
)
from .export import ssbn_to_dot, ssbn_to_json
from .grounding import build_ssbn
from .inference import posterior_enumerate, posterior_ve
from .model import entity_pool, validate_mtheory

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_GROUNDING = 3
EXIT_INFERENCE = 4


@dataclass
class RunConfig:
    model_path: str
    findings_path: str
    query_text: str
    engine: str = "ve"  # "ve" | "enumerate"
    dump_ssbn: str | None = None
    dump_format: str | None = None  # "dot" | "json" | None (infer from extension)
    verbose: bool = False


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def format_posterior(posterior) -> str:
    return "".join(
        f"{state} {p:.6f}\n" for state, p in zip(posterior.states, posterior.probabilities)
    )


def cmd_validate(model_path: str) -> int:
    try:
        text = _read_text(model_path)
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO
    try:
        theory = parse_model(text, file=model_path)
    except ParseError as exc:
        for diagnostic in exc.diagnostics:
            _err(str(diagnostic))
        return EXIT_PARSE
    report = validate_mtheory(theory)
    if report:
        for violation in report:
            print(violation)
        return EXIT_GROUNDING
    print("OK")
    return EXIT_OK


def _dump_format(config: RunConfig) -> str:
    if config.dump_format:
        return config.dump_format
    suffix = Path(config.dump_ssbn or "").suffix.lower()
    if suffix == ".dot":
        return "dot"
    if suffix == ".json":
        return "json"
    raise ValueError(
        f"cannot infer SSBN export format from {config.dump_ssbn!r}; pass --format dot|json"
    )


def cmd_infer(config: RunConfig) -> int:
    try:
        model_text = _read_text(config.model_path)
        findings_text = _read_text(config.findings_path)
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_IO

    try:
        theory = parse_model(model_text, file=config.model_path)
        findings = parse_findings(findings_text, theory, file=config.findings_path)
    except ParseError as exc:
        for diagnostic in exc.diagnostics:
            _err(str(diagnostic))
        return EXIT_PARSE

    report = validate_mtheory(theory)
    if report:
        for violation in report:
            _err(str(violation))
        return EXIT_GROUNDING

    try:
        pool = entity_pool(findings, theory)
        query = parse_query(config.query_text, theory, pool)
    except ParseError as exc:
        for diagnostic in exc.diagnostics:
            _err(str(diagnostic))
        return EXIT_PARSE
    except (UnknownFunctorError, GroundingError, MebnError) as exc:
        _err(f"error: {exc}")
        return EXIT_GROUNDING

    try:
        ssbn = build_ssbn(theory, findings, query)
    except MebnError as exc:
        _err(f"error: {exc}")
        return EXIT_GROUNDING

    for warning in ssbn.warnings:
        _err(f"warning: {warning}")
    if config.verbose:
        _err(f"ssbn: {ssbn.n_nodes} nodes, {ssbn.n_edges} edges")

    if config.dump_ssbn:
        try:
            fmt = _dump_format(config)
        except ValueError as exc:
            _err(f"error: {exc}")
            return EXIT_PARSE
        text = ssbn_to_dot(ssbn) if fmt == "dot" else ssbn_to_json(ssbn)
        try:
            Path(config.dump_ssbn).write_text(text, encoding="utf-8")
        except OSError as exc:
            _err(f"error: {exc}")
            return EXIT_IO

    try:
        if config.engine == "enumerate":
            posterior = posterior_enumerate(ssbn)
        else:
            posterior = posterior_ve(ssbn)
    except InferenceError as exc:
        _err(f"error: {exc}")
        return EXIT_INFERENCE

    sys.stdout.write(format_posterior(posterior))
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mebnkit",
        description="Multi-Entity Bayesian Network grounding and exact inference.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="parse and validate a model file")
    p_validate.add_argument("model", help="path to the model file")

    p_infer = sub.add_parser("infer", help="ground a query and compute its posterior")
    p_infer.add_argument("--model", required=True, help="path to the model file")
    p_infer.add_argument("--findings", required=True, help="path to the findings file")
    p_infer.add_argument("--query", required=True, help="query text, e.g. 'SeverityLevel(region_1)?'")
    p_infer.add_argument(
        "--engine", choices=("ve", "enumerate"), default="ve",
        help="inference engine (default: ve)",
    )
    p_infer.add_argument("--dump-ssbn", metavar="PATH", help="also export the grounded SSBN")
    p_infer.add_argument(
        "--format", choices=("dot", "json"), default=None,
        help="SSBN export format (default: inferred from the --dump-ssbn extension)",
    )
    p_infer.add_argument("-v", "--verbose", action="store_true", help="extra diagnostics on stderr")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.model)
    config = RunConfig(
        model_path=args.model,
        findings_path=args.findings,
        query_text=args.query,
        engine=args.engine,
        dump_ssbn=args.dump_ssbn,
        dump_format=args.format,
        verbose=args.verbose,
    )
    return cmd_infer(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
