"""Local-variable simplification applied to a node before it is translated.

Two rewrites, both semantics-preserving:

* a local defined by fby or an iterator whose only reader is ``out = local``
  is renamed to ``out`` and the forwarding equation disappears;
* a local defined by a simple expression (no arithmetic, no conditional) is
  substituted into its readers and its equation disappears.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import replace
from typing import Mapping, Sequence

from scade2b.models.scade_ast import (
    Action,
    ActivateIf,
    ArrayIndex,
    Binary,
    BodyItem,
    BoolLit,
    CaseOf,
    ConstRef,
    EnumLit,
    Equation,
    Expr,
    Fby,
    FieldAccess,
    HigherOrderApp,
    IfThenElse,
    IntLit,
    NodeDecl,
    StateDecl,
    StateMachine,
    StructMake,
    Unary,
    VarDecl,
    VarRef,
    walk_expr,
    walk_items,
)

logger = logging.getLogger(__name__)


def substitute(expr: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variable reads by expressions."""
    if not mapping:
        return expr
    if isinstance(expr, VarRef):
        return mapping.get(expr.name, expr)
    if isinstance(expr, Unary):
        return replace(expr, operand=substitute(expr.operand, mapping))
    if isinstance(expr, Binary):
        return replace(expr, left=substitute(expr.left, mapping), right=substitute(expr.right, mapping))
    if isinstance(expr, IfThenElse):
        return replace(
            expr,
            cond=substitute(expr.cond, mapping),
            then=substitute(expr.then, mapping),
            else_=substitute(expr.else_, mapping),
        )
    if isinstance(expr, CaseOf):
        return replace(
            expr,
            scrutinee=substitute(expr.scrutinee, mapping),
            arms=tuple(replace(arm, body=substitute(arm.body, mapping)) for arm in expr.arms),
        )
    if isinstance(expr, Fby):
        return replace(expr, input=substitute(expr.input, mapping))
    if isinstance(expr, StructMake):
        return replace(expr, args=tuple(substitute(a, mapping) for a in expr.args))
    if isinstance(expr, FieldAccess):
        return replace(expr, target=substitute(expr.target, mapping))
    if isinstance(expr, ArrayIndex):
        return replace(expr, target=substitute(expr.target, mapping), index=substitute(expr.index, mapping))
    if isinstance(expr, HigherOrderApp):
        return replace(
            expr,
            init_cond=substitute(expr.init_cond, mapping) if expr.init_cond is not None else None,
            defaults=tuple(substitute(d, mapping) for d in expr.defaults),
            acc_inits=tuple(substitute(a, mapping) for a in expr.acc_inits),
            array_args=tuple(substitute(a, mapping) for a in expr.array_args),
        )
    return expr


def is_simple(expr: Expr) -> bool:
    """Arithmetic-free, conditional-free and unable to fail at run time."""
    if isinstance(expr, (IntLit, BoolLit, VarRef, EnumLit, ConstRef)):
        return True
    if isinstance(expr, Unary):
        return expr.op == "-" and isinstance(expr.operand, IntLit)
    if isinstance(expr, StructMake):
        return all(is_simple(a) for a in expr.args)
    if isinstance(expr, FieldAccess):
        return is_simple(expr.target)
    if isinstance(expr, ArrayIndex):
        return is_simple(expr.target) and isinstance(expr.index, (IntLit, ConstRef))
    return False


def read_counts(items: Sequence[BodyItem]) -> Counter:
    counts: Counter = Counter()
    for item in walk_items(items):
        if isinstance(item, Equation):
            roots = [item.rhs]
        elif isinstance(item, ActivateIf):
            roots = [item.cond]
        else:
            roots = [tr.cond for state in item.states for tr in state.transitions]
        for root in roots:
            for expr in walk_expr(root):
                if isinstance(expr, VarRef):
                    counts[expr.name] += 1
    return counts


# ---- forwarding ----

def _forward_scope(locals_: tuple[VarDecl, ...], items: Sequence[BodyItem], counts: Counter):
    local_names = {d.name for d in locals_}
    items = list(items)
    changed = True
    while changed:
        changed = False
        for fwd in items:
            if not (isinstance(fwd, Equation) and isinstance(fwd.rhs, VarRef) and len(fwd.lhs) == 1):
                continue
            source = fwd.rhs.name
            if source not in local_names or counts[source] != 1:
                continue
            definer = next(
                (
                    it for it in items
                    if isinstance(it, Equation) and source in it.lhs and isinstance(it.rhs, (Fby, HigherOrderApp))
                ),
                None,
            )
            if definer is None:
                continue
            target = fwd.lhs[0]
            renamed = replace(definer, lhs=tuple(target if n == source else n for n in definer.lhs))
            items = [renamed if it is definer else it for it in items if it is not fwd]
            locals_ = tuple(d for d in locals_ if d.name != source)
            local_names.discard(source)
            logger.debug("forwarded %s into %s", source, target)
            changed = True
            break
    return locals_, tuple(_forward_item(it, counts) for it in items)


def _forward_item(item: BodyItem, counts: Counter) -> BodyItem:
    if isinstance(item, ActivateIf):
        return replace(
            item,
            then_branch=_forward_action(item.then_branch, counts),
            else_branch=_forward_action(item.else_branch, counts),
        )
    if isinstance(item, StateMachine):
        states = []
        for state in item.states:
            locals_, body = _forward_scope(state.locals, state.body, counts)
            states.append(replace(state, locals=locals_, body=body))
        return replace(item, states=tuple(states))
    return item


def _forward_action(action: Action, counts: Counter) -> Action:
    locals_, body = _forward_scope(action.locals, action.body, counts)
    return replace(action, locals=locals_, body=body)


# ---- inlining ----

def _inline_scope(locals_: tuple[VarDecl, ...], items: Sequence[BodyItem], outer: Mapping[str, Expr], counts: Counter):
    local_names = {d.name for d in locals_}
    defs: dict[str, Expr] = {}
    for item in items:
        if (
            isinstance(item, Equation)
            and len(item.lhs) == 1
            and item.lhs[0] in local_names
            and counts[item.lhs[0]] > 0
            and is_simple(item.rhs)
        ):
            defs[item.lhs[0]] = item.rhs

    mapping = dict(outer)
    mapping.update(defs)
    # chains of simple locals settle after at most len(defs) rounds
    for _ in range(len(defs) + 1):
        settled = {name: substitute(expr, mapping) for name, expr in defs.items()}
        if settled == {name: mapping[name] for name in defs}:
            break
        mapping.update(settled)

    kept: list[BodyItem] = []
    for item in items:
        if isinstance(item, Equation) and len(item.lhs) == 1 and item.lhs[0] in defs:
            continue
        kept.append(_inline_item(item, mapping, counts))
    return tuple(d for d in locals_ if d.name not in defs), tuple(kept)


def _inline_item(item: BodyItem, mapping: Mapping[str, Expr], counts: Counter) -> BodyItem:
    if isinstance(item, Equation):
        return replace(item, rhs=substitute(item.rhs, mapping))
    if isinstance(item, ActivateIf):
        return replace(
            item,
            cond=substitute(item.cond, mapping),
            then_branch=_inline_action(item.then_branch, mapping, counts),
            else_branch=_inline_action(item.else_branch, mapping, counts),
        )
    states: list[StateDecl] = []
    for state in item.states:
        transitions = tuple(replace(tr, cond=substitute(tr.cond, mapping)) for tr in state.transitions)
        locals_, body = _inline_scope(state.locals, state.body, mapping, counts)
        states.append(replace(state, transitions=transitions, locals=locals_, body=body))
    return replace(item, states=tuple(states))


def _inline_action(action: Action, mapping: Mapping[str, Expr], counts: Counter) -> Action:
    locals_, body = _inline_scope(action.locals, action.body, mapping, counts)
    return replace(action, locals=locals_, body=body)


def simplify_node(node: NodeDecl) -> NodeDecl:
    counts = read_counts(node.body)
    locals_, body = _forward_scope(node.locals, node.body, counts)
    counts = read_counts(body)
    locals_, body = _inline_scope(locals_, body, {}, counts)
    removed = len(node.locals) - len(locals_)
    if removed:
        logger.debug("%s: %d node-level local(s) removed", node.name, removed)
    return replace(node, locals=locals_, body=body)
