"""Hand-made mutants of translated machines, used to show the harness notices them."""
from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable

from scade2b.core.errors import ConfigurationError
from scade2b.models.b_ast import (
    BApply,
    BIdent,
    BInt,
    BMachine,
    Case,
    FunctionOverride,
    If,
    Parallel,
    Seq,
    Skip,
    Substitution,
    Var,
    While,
    seq,
)

logger = logging.getLogger(__name__)


def _drop(sub: Substitution, doomed: Callable[[Substitution], bool]) -> Substitution:
    if doomed(sub):
        return Skip()
    if isinstance(sub, Seq):
        return seq(_drop(item, doomed) for item in sub.items)
    if isinstance(sub, Parallel):
        kept = [item for item in (_drop(i, doomed) for i in sub.items) if not isinstance(item, Skip)]
        if not kept:
            return Skip()
        return kept[0] if len(kept) == 1 else Parallel(tuple(kept))
    if isinstance(sub, If):
        return replace(
            sub,
            branches=tuple((cond, _drop(body, doomed)) for cond, body in sub.branches),
            else_=_drop(sub.else_, doomed) if sub.else_ is not None else None,
        )
    if isinstance(sub, Case):
        return replace(
            sub,
            arms=tuple((labels, _drop(body, doomed)) for labels, body in sub.arms),
            else_=_drop(sub.else_, doomed) if sub.else_ is not None else None,
        )
    if isinstance(sub, (While, Var)):
        return replace(sub, body=_drop(sub.body, doomed))
    return sub


def drop_substitutions(machine: BMachine, doomed: Callable[[Substitution], bool]) -> tuple[BMachine, int]:
    """Replace every matching substitution in the operations by skip; returns the mutant and the count."""
    removed = 0

    def counting(sub: Substitution) -> bool:
        nonlocal removed
        if doomed(sub):
            removed += 1
            return True
        return False

    operations = tuple(replace(op, body=_drop(op.body, counting)) for op in machine.operations)
    return replace(machine, operations=operations), removed


def drop_shift_assignment(machine: BMachine, var: str | None, cell: int) -> BMachine:
    """Remove ``var(cell) := var(cell + 1)`` from the fby shift of ``var``.

    ``var`` may be omitted when the machine has exactly one buffer that has
    such an assignment.
    """

    def shift_of(name: str) -> Callable[[Substitution], bool]:
        expected = BApply(BIdent(name), BInt(cell + 1))
        return lambda sub: (
            isinstance(sub, FunctionOverride)
            and sub.name == name
            and sub.index == BInt(cell)
            and sub.value == expected
        )

    if var is None:
        candidates = [name for name in machine.variables if drop_substitutions(machine, shift_of(name))[1]]
        if len(candidates) != 1:
            raise ConfigurationError(
                f"cannot pick the buffer for cell {cell}: candidates {', '.join(candidates) or 'none'}"
            )
        var = candidates[0]
    mutant, removed = drop_substitutions(machine, shift_of(var))
    if not removed:
        raise ConfigurationError(f"no assignment {var}({cell}) := {var}({cell + 1}) in {machine.name}")
    logger.info("mutant of %s: dropped %d assignment(s) %s(%d) := %s(%d)", machine.name, removed, var, cell, var, cell + 1)
    return mutant
