"""Command line: ``scade2b translate|simulate|check``.

Exit codes: 0 success, 1 SCADE frontend error, 2 translation or usage error,
3 lock-step divergence, 4 runtime error, 5 invariant violation, 6 state bound
exceeded.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from pydantic import ValidationError

from scade2b import __version__
from scade2b.core.config import settings
from scade2b.core.errors import (
    BInitialisationError,
    ConfigurationError,
    FrontendError,
    RuntimeFault,
    TranslationError,
)
from scade2b.core.logging import configure_logging
from scade2b.models.runtime import BoundExceeded, Verified
from scade2b.schemas.config_schema import Config
from scade2b.services import pipeline_service
from scade2b.services.checker_service import render_counterexample
from scade2b.services.equivalence_service import run_b, run_scade
from scade2b.utils.file_utils import read_text, write_text
from scade2b.utils.trace_format import format_counterexample, format_cycle

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FRONTEND = 1
EXIT_TRANSLATION = 2
EXIT_DIVERGENCE = 3
EXIT_RUNTIME = 4
EXIT_VIOLATION = 5
EXIT_BOUND = 6


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scade2b", description="Translate SCADE models into B machines and test the result.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="logging level (default from SCADE2B_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    translate = sub.add_parser("translate", help="emit the B machine of a SCADE program")
    translate.add_argument("inputs", nargs=1, metavar="SOURCE")
    translate.add_argument("-o", "--output", help="write the machine here instead of standard output")
    translate.add_argument("--machine-name")
    translate.add_argument("--flavor", choices=["ascii", "unicode"])
    translate.add_argument("--unicode", dest="flavor", action="store_const", const="unicode", help="same as --flavor unicode")

    simulate = sub.add_parser("simulate", help="run a trace on the SCADE node, the B operation or both")
    simulate.add_argument("inputs", nargs=1, metavar="SOURCE")
    simulate.add_argument("--trace", help="trace file; without it a seeded trace is generated")
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--cycles", type=int)
    simulate.add_argument("--side", choices=["scade", "b", "both"], default="both")
    simulate.add_argument("--node")
    simulate.add_argument("--domain", dest="domains", action="append", default=[], metavar="NAME=A..B",
                          help="integer bounds for a generated input")
    simulate.add_argument("--mutate", metavar="drop-shift:[VAR:]CELL")

    check = sub.add_parser("check", help="explore the machine's state space against its INVARIANT")
    check.add_argument("inputs", nargs=1, metavar="SOURCE")
    check.add_argument("--max-states", type=int)
    check.add_argument("--domain", dest="domains", action="append", default=[], metavar="NAME=A..B",
                       help="finite range for an integer operation parameter")
    check.add_argument("--export", help="write the counterexample as a trace with an op= column")
    return parser


def _config(args: argparse.Namespace) -> Config:
    fields = {k: v for k, v in vars(args).items() if k in Config.model_fields and v is not None}
    return Config(**fields)


def cmd_translate(config: Config) -> int:
    path = config.inputs[0]
    _, text = pipeline_service.translate_source(read_text(path), path, config.machine_name, config.flavor)
    if config.output:
        write_text(config.output, text)
        logger.info("wrote %s", config.output)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(config: Config) -> int:
    path = config.inputs[0]
    compiled = pipeline_service.compile_source(read_text(path), path, config.machine_name)
    bounds = pipeline_service.parse_domains(config.domains)
    trace_text = read_text(config.trace) if config.trace else None
    trace = pipeline_service.resolve_trace(
        compiled, trace_text, config.seed, config.cycles, bounds, config.node, config.trace or ""
    )
    if config.side == "scade":
        for cycle, outputs, state in run_scade(compiled.program, compiled.translation, trace, config.node):
            print(format_cycle({"cycle": cycle, **outputs, **state}))
        return EXIT_OK
    if config.side == "b":
        for cycle, outputs, state in run_b(compiled.translation, trace, config.node):
            print(format_cycle({"cycle": cycle, **outputs, **state}))
        return EXIT_OK

    report = pipeline_service.simulate(compiled, trace, config.node, config.mutate)
    for record in report.records:
        print(format_cycle({"cycle": record.cycle, **record.b_outputs}))
    for diagnostic in report.while_diagnostics:
        print(f"warning: {diagnostic}", file=sys.stderr)
    if report.equivalent:
        print(f"equivalent: {report.cycles_compared} cycle(s) compared")
        last = report.records[-1] if report.records else None
        if last is not None and last.error is not None:
            print(f"runtime error at cycle {last.cycle} on both sides: {last.error.value}", file=sys.stderr)
            return EXIT_RUNTIME
        return EXIT_OK
    d = report.divergence
    print(f"divergent at cycle {d.cycle}: {d.kind.value} {d.name}: scade={d.scade_value} b={d.b_value}")
    return EXIT_DIVERGENCE


def cmd_check(config: Config) -> int:
    path = config.inputs[0]
    compiled = pipeline_service.compile_source(read_text(path), path, config.machine_name)
    overrides = pipeline_service.parse_domains(config.domains)
    result = pipeline_service.check(compiled, config.max_states, overrides)
    if isinstance(result, Verified):
        print(f"{result.states_visited} states, verified ({result.transitions_fired} transitions)")
        return EXIT_OK
    if isinstance(result, BoundExceeded):
        print(f"bound exceeded: {result.states_visited} states visited, limit {result.bound}")
        return EXIT_BOUND
    print(f"invariant violation after {len(result.counterexample)} step(s)")
    print(render_counterexample(result.counterexample), end="")
    if config.export:
        write_text(config.export, format_counterexample(result.counterexample))
    return EXIT_VIOLATION


COMMANDS = {"translate": cmd_translate, "simulate": cmd_simulate, "check": cmd_check}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.LOG_LEVEL)
    try:
        config = _config(args)
    except ValidationError as exc:
        for error in exc.errors():
            print(f"scade2b: {error['msg']}", file=sys.stderr)
        return EXIT_TRANSLATION
    try:
        return COMMANDS[config.command](config)
    except FrontendError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FRONTEND
    except (TranslationError, ConfigurationError) as exc:
        print(exc, file=sys.stderr)
        return EXIT_TRANSLATION
    except (RuntimeFault, BInitialisationError) as exc:
        print(exc, file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"scade2b: {exc}", file=sys.stderr)
        return EXIT_TRANSLATION


if __name__ == "__main__":
    sys.exit(main())
