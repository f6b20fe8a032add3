"""Lock-step differential execution of a SCADE node and its B operation."""
from __future__ import annotations

import logging
import random
from typing import Iterator, Mapping

from scade2b.core.errors import BRuntimeError, ConfigurationError, ScadeRuntimeError
from scade2b.models.b_ast import BMachine
from scade2b.models.runtime import (
    BState,
    CycleRecord,
    Diagnostic,
    DiffReport,
    Divergence,
    DivergenceKind,
    NodeState,
    Trace,
)
from scade2b.models.scade_ast import ArrayType, BaseType, EnumType, NodeDecl, StructType, TypedProgram, TypeExpr
from scade2b.models.translation import NodeBinding, TranslationResult
from scade2b.models.values import ArrayValue, EnumMember, RecordValue, Value, format_b_value, rename_value
from scade2b.services.b_interpreter import BInterpreter
from scade2b.services.scade_interpreter import ScadeInterpreter

logger = logging.getLogger(__name__)


# ---- trace generation ----

def _random_value(rng: random.Random, ty: TypeExpr, bounds: tuple[int, int] | None) -> Value:
    if isinstance(ty, BaseType):
        if ty.name == "bool":
            return rng.random() < 0.5
        low, high = bounds or ty.bounds or (0, 0)
        return rng.randint(low, high)
    if isinstance(ty, EnumType):
        return EnumMember(rng.choice(ty.members))
    if isinstance(ty, ArrayType):
        return ArrayValue(tuple(_random_value(rng, ty.elem, bounds) for _ in range(ty.length or 0)))
    if isinstance(ty, StructType):
        return RecordValue(tuple((name, _random_value(rng, t, bounds)) for name, t in ty.fields))
    raise TypeError(f"cannot generate values of {ty!r}")


def generate_trace(
    node: NodeDecl,
    seed: int,
    length: int,
    bounds: Mapping[str, tuple[int, int]] | None = None,
) -> Trace:
    """Seeded inputs uniform over each declared input type.

    ``bounds`` narrows the integer cells of the named inputs.
    """
    bounds = bounds or {}
    for name, (low, high) in bounds.items():
        if low > high:
            raise ConfigurationError(f"empty range {low}..{high} for {name}")
    rng = random.Random(seed)
    cycles = tuple(
        {decl.name: _random_value(rng, decl.type, bounds.get(decl.name)) for decl in node.inputs}
        for _ in range(length)
    )
    return Trace(cycles, f"seed={seed} length={length}")


# ---- state correspondence ----

def mapped_state(binding: NodeBinding, state: NodeState, names: Mapping[str, str]) -> dict[str, Value]:
    """The SCADE node state spelled as the B variables it is bound to."""
    view: dict[str, Value] = {}
    for instance, variable in binding.fby.items():
        buffer = state.fby_buffers[instance]
        view[variable] = ArrayValue(tuple(rename_value(cell, names) for cell in buffer))
    for automaton, variable in binding.automata.items():
        active = state.sm_states[automaton]
        view[variable] = EnumMember(names.get(active, active))
    return view


def b_arguments(binding: NodeBinding, inputs: Mapping[str, Value], names: Mapping[str, str]) -> dict[str, Value]:
    return {b_name: rename_value(inputs[s_name], names) for s_name, b_name in binding.inputs if s_name in inputs}


def _same(a: Value, b: Value) -> bool:
    return a == b and type(a) is type(b)


def _bound_variables(binding: NodeBinding) -> list[str]:
    return [*binding.fby.values(), *binding.automata.values()]


# ---- lock-step ----

def run_lockstep(
    program: TypedProgram,
    translation: TranslationResult,
    trace: Trace,
    node: str | None = None,
    machine: BMachine | None = None,
) -> DiffReport:
    """Step both sides on every cycle of the trace and stop at the first mismatch.

    ``machine`` replaces the translated machine, e.g. with a mutant, while
    keeping the translation's binding.
    """
    binding = translation.binding(node)
    names = translation.names
    scade = ScadeInterpreter(program)
    b = BInterpreter(machine or translation.machine)
    scade_state = scade.init_state(binding.node)
    b_state = b.init_machine()
    records: list[CycleRecord] = []
    loop_diagnostics: list[Diagnostic] = []

    def report(cycle: int, divergence: Divergence | None) -> DiffReport:
        status = "equivalent" if divergence is None else "divergent"
        if divergence is None:
            logger.info("lock-step: %d cycle(s) equivalent", cycle)
        else:
            logger.info("lock-step: divergence at cycle %d on %s", divergence.cycle, divergence.name)
        return DiffReport(status, cycle, divergence, tuple(records), tuple(loop_diagnostics))

    for cycle, inputs in enumerate(trace.cycles, start=1):
        scade_error: ScadeRuntimeError | None = None
        scade_outputs: dict[str, Value] = {}
        try:
            scade_outputs, scade_state = scade.step(binding.node, scade_state, inputs)
        except ScadeRuntimeError as exc:
            scade_error = exc
        result = b.invoke(b_state, binding.operation, b_arguments(binding, inputs, names))
        loop_diagnostics.extend(result.while_diagnostics)
        b_error = result.error
        scade_kind = scade_error.kind if scade_error is not None else None
        records.append(CycleRecord(cycle, inputs, scade_outputs, result.outputs, b_error or scade_kind))

        if scade_kind is not None or b_error is not None:
            if scade_kind == b_error:
                logger.info("cycle %d: both sides fail with %s", cycle, b_error.value)
                return report(cycle, None)
            return report(
                cycle,
                Divergence(
                    cycle,
                    DivergenceKind.RUNTIME_ERROR,
                    (scade_kind or b_error).value,
                    str(scade_error) if scade_error is not None else "ok",
                    "; ".join(str(d) for d in result.diagnostics) if b_error is not None else "ok",
                ),
            )
        b_state = result.state

        for s_name, b_name in binding.outputs:
            expected = rename_value(scade_outputs[s_name], names)
            actual = result.outputs[b_name]
            if not _same(expected, actual):
                return report(
                    cycle,
                    Divergence(cycle, DivergenceKind.OUTPUT, s_name, format_b_value(expected), format_b_value(actual)),
                )
        view = mapped_state(binding, scade_state, names)
        for variable in _bound_variables(binding):
            if not _same(view[variable], b_state[variable]):
                return report(
                    cycle,
                    Divergence(
                        cycle,
                        DivergenceKind.MAPPED_STATE,
                        variable,
                        format_b_value(view[variable]),
                        format_b_value(b_state[variable]),
                    ),
                )
        logger.debug("cycle %d: outputs and state agree", cycle)
    return report(len(trace.cycles), None)


# ---- single-side runs ----

def run_scade(
    program: TypedProgram, translation: TranslationResult, trace: Trace, node: str | None = None
) -> Iterator[tuple[int, dict[str, Value], dict[str, Value]]]:
    """Per cycle: outputs and the bound state, both in B spelling."""
    binding = translation.binding(node)
    names = translation.names
    interpreter = ScadeInterpreter(program)
    state = interpreter.init_state(binding.node)
    for cycle, inputs in enumerate(trace.cycles, start=1):
        outputs, state = interpreter.step(binding.node, state, inputs)
        yield (
            cycle,
            {b_name: rename_value(outputs[s_name], names) for s_name, b_name in binding.outputs},
            mapped_state(binding, state, names),
        )


def run_b(
    translation: TranslationResult, trace: Trace, node: str | None = None, machine: BMachine | None = None
) -> Iterator[tuple[int, dict[str, Value], dict[str, Value]]]:
    binding = translation.binding(node)
    interpreter = BInterpreter(machine or translation.machine)
    state: BState = interpreter.init_machine()
    for cycle, inputs in enumerate(trace.cycles, start=1):
        result = interpreter.invoke(state, binding.operation, b_arguments(binding, inputs, translation.names))
        if result.error is not None:
            detail = "; ".join(d.detail or d.location for d in result.diagnostics)
            raise BRuntimeError(result.error, f"cycle {cycle}: {detail}")
        state = result.state
        yield cycle, dict(result.outputs), {v: state[v] for v in _bound_variables(binding)}
