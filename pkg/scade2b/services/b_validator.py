"""Structural checks on a machine before it is emitted or executed."""
from __future__ import annotations

import logging
from typing import Iterator

from scade2b.models.b_ast import (
    BIdent,
    BInterval,
    BMachine,
    Parallel,
    PAnd,
    PForAll,
    PImplies,
    PMember,
    PNot,
    POr,
    Predicate,
    Substitution,
    While,
    conjuncts,
    walk_substitution,
    written_names,
)

logger = logging.getLogger(__name__)


def _typed_names(parts) -> list[str]:
    return [p.element.name for p in parts if isinstance(p, PMember) and isinstance(p.element, BIdent)]


def _walk_predicate(pred: Predicate) -> Iterator[Predicate]:
    yield pred
    if isinstance(pred, (PAnd, POr)):
        for part in pred.parts:
            yield from _walk_predicate(part)
    elif isinstance(pred, PImplies):
        yield from _walk_predicate(pred.left)
        yield from _walk_predicate(pred.right)
    elif isinstance(pred, PNot):
        yield from _walk_predicate(pred.operand)
    elif isinstance(pred, PForAll):
        yield from _walk_predicate(pred.body)


def quantifier_range(pred: PForAll) -> BInterval | None:
    """The integer interval an antecedent ``var : a..b`` bounds the quantifier to."""
    if not isinstance(pred.body, PImplies):
        return None
    for part in conjuncts(pred.body.left):
        if (
            isinstance(part, PMember)
            and isinstance(part.element, BIdent)
            and part.element.name == pred.var
            and isinstance(part.set, BInterval)
        ):
            return part.set
    return None


def _check_quantifiers(pred: Predicate, where: str) -> list[str]:
    problems = []
    for inner in _walk_predicate(pred):
        if isinstance(inner, PForAll) and quantifier_range(inner) is None:
            problems.append(f"quantifier over {inner.var} has no finite integer range in {where}")
    return problems


def _check_substitution(sub: Substitution, where: str) -> list[str]:
    problems = []
    for inner in walk_substitution(sub):
        if isinstance(inner, While):
            if inner.invariant is None:
                problems.append(f"WHILE without INVARIANT in {where}")
            else:
                problems.extend(_check_quantifiers(inner.invariant, where))
            if inner.variant is None:
                problems.append(f"WHILE without VARIANT in {where}")
        elif isinstance(inner, Parallel):
            seen: set[str] = set()
            for branch in inner.items:
                written = written_names(branch)
                for name in sorted(written & seen):
                    problems.append(f"parallel branches both write {name} in {where}")
                seen |= written
    return problems


def validate_machine(machine: BMachine) -> list[str]:
    """Diagnostics for every broken structural rule; empty when the machine is well formed."""
    problems: list[str] = []
    typed = _typed_names(machine.invariant)
    for name in machine.variables:
        count = typed.count(name)
        if count == 0:
            problems.append(f"variable not typed: {name}")
        elif count > 1:
            problems.append(f"variable typed more than once: {name}")
    for pred in machine.invariant:
        problems.extend(_check_quantifiers(pred, "INVARIANT"))

    if machine.variables:
        assigned = written_names(machine.initialisation) if machine.initialisation is not None else set()
        for name in machine.variables:
            if name not in assigned:
                problems.append(f"variable not initialised: {name}")
    if machine.initialisation is not None:
        problems.extend(_check_substitution(machine.initialisation, "INITIALISATION"))

    for op in machine.operations:
        params_typed = _typed_names(conjuncts(op.precondition))
        for param in op.params:
            if param not in params_typed:
                problems.append(f"parameter not typed: {op.name}.{param}")
        problems.extend(_check_substitution(op.body, op.name))

    if problems:
        logger.debug("machine %s: %d structural problem(s)", machine.name, len(problems))
    return problems
