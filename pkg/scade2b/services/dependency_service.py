"""Scheduling of dataflow equations into a sequential order."""
from __future__ import annotations

import logging
from typing import Iterable, Sequence

from scade2b.core.errors import CausalityError
from scade2b.models.scade_ast import (
    Action,
    ActivateIf,
    BodyItem,
    Equation,
    Expr,
    Fby,
    NodeDecl,
    StateMachine,
    VarRef,
    sub_expressions,
)

logger = logging.getLogger(__name__)


def expr_reads(expr: Expr) -> set[str]:
    """Current-cycle variables read by an expression. A fby reads nothing now."""
    if isinstance(expr, Fby):
        return set()
    if isinstance(expr, VarRef):
        return {expr.name}
    reads: set[str] = set()
    for child in sub_expressions(expr):
        reads |= expr_reads(child)
    return reads


def fby_input_reads(expr: Expr) -> set[str]:
    """Variables a fby's end-of-cycle shift reads."""
    if isinstance(expr, Fby):
        return expr_reads(expr.input)
    return set()


def _scope_defs(items: Iterable[BodyItem]) -> set[str]:
    defs: set[str] = set()
    for item in items:
        defs.update(item_defs(item))
    return defs


def _scope_reads(action_locals, items: Sequence[BodyItem]) -> set[str]:
    reads: set[str] = set()
    for item in items:
        reads |= item_reads(item)
    return reads - _scope_defs(items) - {d.name for d in action_locals}


def item_defs(item: BodyItem) -> tuple[str, ...]:
    """Variables an item defines, seen from the enclosing scope."""
    if isinstance(item, Equation):
        return item.lhs
    if isinstance(item, ActivateIf):
        return _branch_defs(item.then_branch)
    if isinstance(item, StateMachine):
        names: list[str] = []
        for state in item.states:
            local_names = {d.name for d in state.locals}
            for name in sorted(_scope_defs(state.body) - local_names):
                if name not in names:
                    names.append(name)
        return tuple(names)
    raise TypeError(f"not a body item: {item!r}")


def _branch_defs(action: Action) -> tuple[str, ...]:
    local_names = {d.name for d in action.locals}
    names: list[str] = []
    for inner in action.body:
        for name in item_defs(inner):
            if name not in local_names and name not in names:
                names.append(name)
    return tuple(names)


def item_reads(item: BodyItem) -> set[str]:
    """Current-cycle variables an item reads from the enclosing scope."""
    if isinstance(item, Equation):
        return expr_reads(item.rhs)
    if isinstance(item, ActivateIf):
        reads = expr_reads(item.cond)
        for branch in (item.then_branch, item.else_branch):
            reads |= _scope_reads(branch.locals, branch.body)
        return reads
    if isinstance(item, StateMachine):
        reads: set[str] = set()
        for state in item.states:
            for tr in state.transitions:
                reads |= expr_reads(tr.cond)
            reads |= _scope_reads(state.locals, state.body)
        return reads
    raise TypeError(f"not a body item: {item!r}")


def order_items(items: Sequence[BodyItem], filename: str | None = None) -> list[BodyItem]:
    """Stable topological order: among ready items the earliest in source goes first."""
    definer: dict[str, int] = {}
    for index, item in enumerate(items):
        for name in item_defs(item):
            definer.setdefault(name, index)

    deps: list[set[int]] = []
    for index, item in enumerate(items):
        needed = {definer[name] for name in item_reads(item) if name in definer}
        if index in needed:
            raise CausalityError(
                _self_cycle(item, definer, index), getattr(item, "pos", None), filename
            )
        deps.append(needed)

    done: set[int] = set()
    order: list[BodyItem] = []
    while len(order) < len(items):
        ready = [i for i in range(len(items)) if i not in done and deps[i] <= done]
        if not ready:
            remaining = [i for i in range(len(items)) if i not in done]
            cycle = _find_cycle(items, deps, definer, remaining)
            raise CausalityError(cycle, getattr(items[remaining[0]], "pos", None), filename)
        chosen = min(ready)
        done.add(chosen)
        order.append(items[chosen])
    return order


def _self_cycle(item: BodyItem, definer: dict[str, int], index: int) -> list[str]:
    names = [n for n in sorted(item_reads(item)) if definer.get(n) == index]
    return names[:1] or list(item_defs(item)[:1])


def _find_cycle(items, deps, definer, remaining) -> list[str]:
    stuck = set(remaining)
    start = remaining[0]
    path: list[int] = [start]
    seen = {start: 0}
    current = start
    while True:
        current = min(d for d in deps[current] if d in stuck)
        if current in seen:
            cycle_items = path[seen[current]:]
            break
        seen[current] = len(path)
        path.append(current)

    # each item depends on the next one in the cycle
    names: list[str] = []
    for position, index in enumerate(cycle_items):
        reader = cycle_items[(position - 1) % len(cycle_items)]
        shared = sorted(
            name for name in item_defs(items[index])
            if name in item_reads(items[reader]) and definer.get(name) == index
        )
        names.append(shared[0] if shared else item_defs(items[index])[0])
    pivot = names.index(min(names, key=lambda n: definer.get(n, 0)))
    return names[pivot:] + names[:pivot]


def _validate_nested(items: Sequence[BodyItem], filename: str | None) -> None:
    for item in items:
        if isinstance(item, ActivateIf):
            for branch in (item.then_branch, item.else_branch):
                _validate_nested(order_items(branch.body, filename), filename)
        elif isinstance(item, StateMachine):
            for state in item.states:
                _validate_nested(order_items(state.body, filename), filename)


def dependency_order(node: NodeDecl, filename: str | None = None) -> list[BodyItem]:
    ordered = order_items(node.body, filename)
    _validate_nested(ordered, filename)
    logger.debug("scheduled %d item(s) of %s", len(ordered), node.name)
    return ordered
