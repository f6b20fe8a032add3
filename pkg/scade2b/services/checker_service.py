"""Explicit-state invariant checking by breadth-first search."""
from __future__ import annotations

import itertools
import logging
from collections import deque
from typing import Iterable, Mapping

from scade2b.core.config import settings
from scade2b.core.errors import BRuntimeError, ConfigurationError, DiagnosticKind, Scade2BError
from scade2b.models.b_ast import BMachine
from scade2b.models.b_sets import IntervalSet
from scade2b.models.runtime import (
    BoundExceeded,
    BState,
    Counterexample,
    Domains,
    ExploreResult,
    Step,
    Verified,
    Violation,
)
from scade2b.models.values import Value, format_b_value
from scade2b.services.b_interpreter import BInterpreter

logger = logging.getLogger(__name__)


def derive_domains(
    machine: BMachine,
    overrides: Mapping[str, tuple[int, int]] | None = None,
    operations: Iterable[str] | None = None,
    max_domain_size: int | None = None,
) -> Domains:
    """Finite argument lists from the PRE typing of each operation.

    An override is keyed by ``param`` or ``Operation.param`` and replaces the
    typing with an integer range.
    """
    overrides = overrides or {}
    limit = max_domain_size or settings.MAX_DOMAIN_SIZE
    interpreter = BInterpreter(machine)
    wanted = list(operations) if operations is not None else [op.name for op in machine.operations]
    values: dict[str, dict[str, tuple[Value, ...]]] = {}
    for op_name in wanted:
        op = interpreter.operation(op_name)
        types = interpreter.parameter_types(op)
        per_param: dict[str, tuple[Value, ...]] = {}
        for param in op.params:
            bound = overrides.get(f"{op.name}.{param}", overrides.get(param))
            domain = IntervalSet(*bound) if bound is not None else types[param]
            if domain is None:
                raise ConfigurationError(f"parameter {param} of {op.name} is untyped; give --domain {param}=a..b")
            size = domain.size()
            if size is None or size > limit:
                raise ConfigurationError(
                    f"domain of {op.name}.{param} ({domain}) is too large to enumerate; give --domain {param}=a..b"
                )
            if size == 0:
                raise ConfigurationError(f"domain of {op.name}.{param} is empty")
            per_param[param] = tuple(domain.members())
        values[op.name] = per_param
    return Domains(values)


def _arguments(params: tuple[str, ...], domain: Mapping[str, tuple[Value, ...]]):
    pools = [domain[p] for p in params]
    for combo in itertools.product(*pools):
        yield tuple(zip(params, combo))


def _path(parents: dict[BState, tuple[BState, Step] | None], state: BState) -> tuple[Step, ...]:
    steps: list[Step] = []
    link = parents[state]
    while link is not None:
        previous, step = link
        steps.append(step)
        link = parents[previous]
    return tuple(reversed(steps))


def explore(machine: BMachine, domains: Domains, max_states: int | None = None) -> ExploreResult:
    """Breadth-first reachability from INITIALISATION, checking INVARIANT on every new state."""
    bound = max_states or settings.MAX_STATES
    interpreter = BInterpreter(machine)
    initial = interpreter.init_machine(check=False)
    verdict = interpreter.check_invariant(initial)
    if not verdict.holds:
        logger.info("%s: INITIALISATION already violates the invariant", machine.name)
        return Violation(Counterexample((), initial, verdict.conjunct), 1, 0)

    operations = [op for op in machine.operations if op.name in domains.values]
    parents: dict[BState, tuple[BState, Step] | None] = {initial: None}
    frontier: deque[BState] = deque([initial])
    fired = 0
    while frontier:
        state = frontier.popleft()
        for op in operations:
            for args in _arguments(op.params, domains.for_operation(op.name)):
                result = interpreter.invoke(state, op.name, dict(args), report_violations=True)
                if result.error == DiagnosticKind.PRE_VIOLATION:
                    continue
                if result.error is not None:
                    detail = "; ".join(d.detail or d.location for d in result.diagnostics)
                    raise BRuntimeError(result.error, f"{op.name} during exploration: {detail}")
                fired += 1
                successor = result.state
                if successor in parents:
                    continue
                step = Step(op.name, args, tuple(result.outputs.items()), successor)
                parents[successor] = (state, step)
                if not result.invariant_holds:
                    verdict = interpreter.check_invariant(successor)
                    steps = _path(parents, successor)
                    logger.info(
                        "%s: invariant violated after %d step(s), %d state(s) visited",
                        machine.name, len(steps), len(parents),
                    )
                    return Violation(Counterexample(steps, initial, verdict.conjunct), len(parents), fired)
                if len(parents) > bound:
                    logger.info("%s: state bound %d exceeded", machine.name, bound)
                    return BoundExceeded(len(parents), bound)
                frontier.append(successor)
    logger.info("%s: verified, %d state(s), %d transition(s)", machine.name, len(parents), fired)
    return Verified(len(parents), fired)


def replay(machine: BMachine, counterexample: Counterexample) -> bool:
    """Whether the steps reproduce every recorded state and end in a violation."""
    interpreter = BInterpreter(machine)
    try:
        state = interpreter.init_machine(check=False)
    except Scade2BError as exc:
        logger.info("replay: initialisation failed: %s", exc)
        return False
    if counterexample.initial_state is not None and state != counterexample.initial_state:
        return False
    for position, step in enumerate(counterexample.steps, start=1):
        try:
            result = interpreter.invoke(state, step.operation, dict(step.args), report_violations=True)
        except Scade2BError as exc:
            logger.info("replay: step %d failed: %s", position, exc)
            return False
        if not result.ok or tuple(result.outputs.items()) != step.outputs or result.state != step.state:
            logger.info("replay: step %d does not reproduce", position)
            return False
        state = result.state
    return not interpreter.check_invariant(state).holds


def _describe(step: Step) -> str:
    args = ", ".join(f"{name}={format_b_value(value)}" for name, value in step.args)
    return f"{step.operation}({args})"


def render_counterexample(counterexample: Counterexample) -> str:
    """Position, transition and output table of a counterexample."""
    rows = [("0", "---root---", ""), ("1", "INITIALISATION", "")]
    for position, step in enumerate(counterexample.steps, start=2):
        output = ", ".join(format_b_value(v) for _, v in step.outputs)
        rows.append((str(position), _describe(step), output))
    header = ("Position", "Transition", "Output")
    widths = [max(len(row[k]) for row in [header, *rows]) for k in range(3)]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in [header, *rows]]
    if counterexample.steps:
        final = counterexample.steps[-1].state
    else:
        final = counterexample.initial_state
    if final is not None:
        lines.append("")
        lines.append("final state: " + ", ".join(f"{n}={format_b_value(v)}" for n, v in final.values))
    if counterexample.failing_conjunct:
        lines.append(f"invariant violated: {counterexample.failing_conjunct}")
    return "\n".join(lines) + "\n"
