"""The translate / simulate / check pipeline shared by the command line and the HTTP routes."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Mapping

from scade2b.core.config import settings
from scade2b.core.errors import ConfigurationError, TranslationError
from scade2b.models.b_ast import BMachine
from scade2b.models.runtime import DiffReport, ExploreResult, Trace
from scade2b.models.scade_ast import TypedProgram
from scade2b.models.translation import TranslationResult
from scade2b.services.b_emitter import emit_machine
from scade2b.services.b_validator import validate_machine
from scade2b.services.checker_service import derive_domains, explore
from scade2b.services.dependency_service import dependency_order
from scade2b.services.equivalence_service import generate_trace, run_lockstep
from scade2b.services.mutation_service import drop_shift_assignment
from scade2b.services.scade_parser import parse_program
from scade2b.services.translator_service import translate
from scade2b.services.typecheck_service import typecheck
from scade2b.utils.trace_format import parse_trace

logger = logging.getLogger(__name__)

_DOMAIN = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*=\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")
_MUTATION = re.compile(r"^drop-shift:(?:([A-Za-z_]\w*):)?(\d+)$")


@dataclass(frozen=True)
class Compiled:
    program: TypedProgram
    translation: TranslationResult

    @property
    def machine(self) -> BMachine:
        return self.translation.machine


def load_program(source: str, filename: str | None = None) -> TypedProgram:
    """Parse, typecheck and causality-check a SCADE program."""
    program = typecheck(parse_program(source, filename), filename)
    for node in program.nodes:
        dependency_order(node, filename)
    logger.info("loaded %s: %d node(s)", filename or "<input>", len(program.nodes))
    return program


def compile_source(source: str, filename: str | None = None, machine_name: str | None = None) -> Compiled:
    program = load_program(source, filename)
    translation = translate(program, machine_name)
    problems = validate_machine(translation.machine)
    if problems:
        raise TranslationError("generated machine is malformed: " + "; ".join(problems), filename=filename)
    return Compiled(program, translation)


def translate_source(
    source: str, filename: str | None = None, machine_name: str | None = None, flavor: str | None = None
) -> tuple[Compiled, str]:
    compiled = compile_source(source, filename, machine_name)
    return compiled, emit_machine(compiled.machine, flavor or settings.EMITTER_FLAVOR)


def parse_domain(text: str) -> tuple[str, tuple[int, int]]:
    """``name=a..b`` as used by ``--domain``."""
    match = _DOMAIN.match(text)
    if match is None:
        raise ConfigurationError(f"bad domain {text!r}; expected name=a..b")
    name, low, high = match.group(1), int(match.group(2)), int(match.group(3))
    if low > high:
        raise ConfigurationError(f"empty domain {text!r}")
    return name, (low, high)


def parse_domains(texts) -> dict[str, tuple[int, int]]:
    return dict(parse_domain(text) for text in texts or ())


def parse_mutation(text: str) -> tuple[str | None, int]:
    """``drop-shift:CELL`` or ``drop-shift:VAR:CELL``."""
    match = _MUTATION.match(text.strip())
    if match is None:
        raise ConfigurationError(f"bad mutation {text!r}; expected drop-shift:CELL or drop-shift:VAR:CELL")
    return match.group(1), int(match.group(2))


def mutated_machine(compiled: Compiled, mutation: str | None) -> BMachine:
    if not mutation:
        return compiled.machine
    var, cell = parse_mutation(mutation)
    return drop_shift_assignment(compiled.machine, var, cell)


def resolve_trace(
    compiled: Compiled,
    trace_text: str | None = None,
    seed: int | None = None,
    cycles: int | None = None,
    bounds: Mapping[str, tuple[int, int]] | None = None,
    node: str | None = None,
    provenance: str = "",
) -> Trace:
    if trace_text is not None:
        return parse_trace(trace_text, provenance)
    binding = compiled.translation.binding(node)
    return generate_trace(
        compiled.program.node(binding.node),
        seed if seed is not None else 0,
        cycles if cycles is not None else settings.DEFAULT_TRACE_CYCLES,
        bounds,
    )


def simulate(compiled: Compiled, trace: Trace, node: str | None = None, mutation: str | None = None) -> DiffReport:
    return run_lockstep(compiled.program, compiled.translation, trace, node, mutated_machine(compiled, mutation))


def checked_operations(compiled: Compiled) -> list[str]:
    """Operations standing for nodes; helper operations called from loops are not transitions."""
    return [binding.operation for binding in compiled.translation.bindings.values()]


def check(
    compiled: Compiled,
    max_states: int | None = None,
    overrides: Mapping[str, tuple[int, int]] | None = None,
) -> ExploreResult:
    domains = derive_domains(compiled.machine, overrides, checked_operations(compiled))
    return explore(compiled.machine, domains, max_states or settings.MAX_STATES)
