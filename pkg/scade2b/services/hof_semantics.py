"""Reference semantics of the twelve iterators.

One loop covers every variant: the index is passed first for the *i variants,
accumulators are threaded for fold and mapfold, and the *w variants stop as
soon as the operator's first output turns false, filling the remaining cells
with the defaults and freezing the accumulators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from scade2b.core.errors import RuntimeFault
from scade2b.models.scade_ast import HigherOrderApp
from scade2b.models.values import ArrayValue, Value

Operator = Callable[[list[Value]], Sequence[Value]]


@dataclass(frozen=True)
class HofLayout:
    """Which left-hand-side names receive the index, condition, accumulators and arrays."""

    idx: str | None
    cond: str | None
    accs: tuple[str, ...]
    outputs: tuple[str, ...]


@dataclass(frozen=True)
class HofResult:
    outputs: tuple[ArrayValue, ...]
    accs: tuple[Value, ...]
    idx: int
    cond: bool | None = None


def _variant_flags(variant: str) -> tuple[bool, bool, str]:
    indexed = variant.endswith("i")
    conditional = variant.rstrip("i").endswith("w")
    family = "mapfold" if variant.startswith("mapfold") else "fold" if variant.startswith("fold") else "map"
    return indexed, conditional, family


def hof_layout(app: HigherOrderApp, lhs: Sequence[str], out_count: int) -> HofLayout:
    bound_cond = app.conditional and app.family == "mapfold"
    core = app.acc_count + out_count + (1 if bound_cond else 0)
    if app.conditional and len(lhs) == core + 1:
        idx, rest = lhs[0], tuple(lhs[1:])
    elif len(lhs) == core:
        idx, rest = None, tuple(lhs)
    else:
        optional = " plus an optional index" if app.conditional else ""
        raise ValueError(f"{app.variant} defines {core} variable(s){optional}, got {len(lhs)}")
    cond = None
    if bound_cond:
        cond, rest = rest[0], rest[1:]
    return HofLayout(idx, cond, rest[:app.acc_count], rest[app.acc_count:])


def eval_higher_order(
    variant: str,
    op: Operator,
    size: int,
    acc_count: int,
    out_count: int,
    init_cond: bool | None = None,
    defaults: Sequence[Value] = (),
    acc_inits: Sequence[Value] = (),
    arrays: Sequence[ArrayValue] = (),
) -> HofResult:
    indexed, conditional, _ = _variant_flags(variant)
    accs = list(acc_inits)
    cells: list[list[Value | None]] = [[None] * size for _ in range(out_count)]
    cond = bool(init_cond) if conditional else True
    idx = 0
    while idx < size and cond:
        args = ([idx] if indexed else []) + accs + [array[idx] for array in arrays]
        try:
            results = list(op(args))
        except RuntimeFault as exc:
            if exc.index is None:
                exc.index = idx
            raise
        if conditional:
            cond = results.pop(0)
        accs = results[:acc_count]
        for j, value in enumerate(results[acc_count:]):
            cells[j][idx] = value
        idx += 1
    for j in range(out_count):
        for i in range(idx, size):
            cells[j][i] = defaults[j]
    return HofResult(
        tuple(ArrayValue(tuple(row)) for row in cells),
        tuple(accs),
        idx,
        cond if conditional else None,
    )
