"""Cycle-based reference executor for typed SCADE programs."""
from __future__ import annotations

import logging
from typing import Mapping, Sequence

from scade2b.core.errors import DiagnosticKind, ScadeRuntimeError
from scade2b.models.runtime import NodeState
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
    StateMachine,
    StructMake,
    TypedProgram,
    TypeExpr,
    Unary,
    VarRef,
    type_name,
    walk_items,
)
from scade2b.models.values import EnumMember, RecordValue, Value, div_trunc, format_value, mod_trunc
from scade2b.services.dependency_service import order_items
from scade2b.services.hof_semantics import HofResult, eval_higher_order, hof_layout
from scade2b.services.typecheck_service import const_values, evaluate_constant, map_output_count, value_in_type

logger = logging.getLogger(__name__)


class _Cycle:
    """Evaluation frame of one node activation."""

    def __init__(self, interpreter: "ScadeInterpreter", node: NodeDecl, state: NodeState):
        self.interpreter = interpreter
        self.node = node
        self.state = state
        self.env: dict[str, Value] = {}
        self.types: dict[str, TypeExpr] = {}
        self.shifts: list[Fby] = []
        self.sm_states: dict[str, str] = dict(state.sm_states)

    def fault(self, kind: DiagnosticKind, message: str) -> ScadeRuntimeError:
        return ScadeRuntimeError(kind, f"{self.node.name}: {message}")

    def write(self, name: str, value: Value) -> None:
        ty = self.types[name]
        if not value_in_type(value, ty):
            raise self.fault(
                DiagnosticKind.RANGE_ERROR, f"{name} := {format_value(value)} is outside {type_name(ty)}"
            )
        self.env[name] = value

    def declare(self, decls) -> None:
        for decl in decls:
            self.types[decl.name] = decl.type

    # ---- items ----
    def run(self, items: Sequence[BodyItem]) -> None:
        for item in self.interpreter.schedule(items):
            if isinstance(item, Equation):
                self.equation(item)
            elif isinstance(item, ActivateIf):
                branch = item.then_branch if self.eval(item.cond) else item.else_branch
                self.action(branch)
            elif isinstance(item, StateMachine):
                self.automaton(item)

    def action(self, action: Action) -> None:
        self.declare(action.locals)
        self.run(action.body)

    def automaton(self, sm: StateMachine) -> None:
        current = self.state.sm_states[sm.name]
        active = current
        for tr in sm.state(current).transitions:
            if self.eval(tr.cond):
                active = tr.target
                break
        if active != current:
            logger.debug("%s: %s %s -> %s", self.node.name, sm.name, current, active)
        self.sm_states[sm.name] = active
        target = sm.state(active)
        self.action(Action(target.locals, target.body))

    def equation(self, eq: Equation) -> None:
        rhs = eq.rhs
        if isinstance(rhs, Fby):
            self.write(eq.lhs[0], self.state.fby_buffers[rhs.instance][0])
            self.shifts.append(rhs)
        elif isinstance(rhs, HigherOrderApp):
            self.higher_order(rhs, eq.lhs)
        else:
            self.write(eq.lhs[0], self.eval(rhs))

    def higher_order(self, app: HigherOrderApp, lhs: tuple[str, ...]) -> None:
        result = self.interpreter.eval_app(app, self.eval)
        op = self.interpreter.operator(app.op)
        layout = hof_layout(app, lhs, map_output_count(app, op))
        if layout.idx is not None:
            self.write(layout.idx, result.idx)
        if layout.cond is not None:
            self.write(layout.cond, result.cond)
        for name, value in zip(layout.accs, result.accs):
            self.write(name, value)
        for name, value in zip(layout.outputs, result.outputs):
            self.write(name, value)

    def shifted_buffers(self) -> dict[int, tuple[Value, ...]]:
        buffers = dict(self.state.fby_buffers)
        for fby in self.shifts:
            value = self.eval(fby.input)
            if not value_in_type(value, fby.ty):
                raise self.fault(
                    DiagnosticKind.RANGE_ERROR, f"fby input {format_value(value)} is outside {type_name(fby.ty)}"
                )
            buffers[fby.instance] = buffers[fby.instance][1:] + (value,)
        return buffers

    # ---- expressions ----
    def eval(self, expr: Expr) -> Value:
        if isinstance(expr, (IntLit, BoolLit)):
            return expr.value
        if isinstance(expr, VarRef):
            if expr.name not in self.env:
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"'{expr.name}' is read before it is defined")
            return self.env[expr.name]
        if isinstance(expr, EnumLit):
            return EnumMember(expr.name)
        if isinstance(expr, ConstRef):
            return self.interpreter.consts[expr.name]
        if isinstance(expr, Unary):
            value = self.eval(expr.operand)
            return (not value) if expr.op == "not" else -value
        if isinstance(expr, Binary):
            return self.binary(expr)
        if isinstance(expr, IfThenElse):
            return self.eval(expr.then) if self.eval(expr.cond) else self.eval(expr.else_)
        if isinstance(expr, CaseOf):
            scrutinee = self.eval(expr.scrutinee)
            for arm in expr.arms:
                if arm.pattern is None or evaluate_constant(arm.pattern, self.interpreter.consts) == scrutinee:
                    return self.eval(arm.body)
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"no case arm matches {format_value(scrutinee)}")
        if isinstance(expr, StructMake):
            names = [f for f, _ in expr.ty.fields]
            return RecordValue(tuple(zip(names, (self.eval(a) for a in expr.args))))
        if isinstance(expr, FieldAccess):
            return self.eval(expr.target).get(expr.field)
        if isinstance(expr, ArrayIndex):
            array = self.eval(expr.target)
            index = self.eval(expr.index)
            if not 0 <= index < len(array):
                raise self.fault(
                    DiagnosticKind.INDEX_OUT_OF_BOUNDS, f"index {index} outside 0..{len(array) - 1}"
                )
            return array[index]
        raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"cannot evaluate {type(expr).__name__} here")

    def binary(self, expr: Binary) -> Value:
        op = expr.op
        if op == "and":
            return bool(self.eval(expr.left)) and bool(self.eval(expr.right))
        if op == "or":
            return bool(self.eval(expr.left)) or bool(self.eval(expr.right))
        left = self.eval(expr.left)
        right = self.eval(expr.right)
        if op == "=":
            return left == right
        if op == "<>":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        try:
            return div_trunc(left, right) if op == "/" else mod_trunc(left, right)
        except ZeroDivisionError:
            raise self.fault(DiagnosticKind.DIVISION_BY_ZERO, f"{format_value(left)} {op} 0") from None


class ScadeInterpreter:
    def __init__(self, program: TypedProgram):
        self.program = program
        self.consts = const_values(program)
        self._nodes = {node.name: node for node in program.nodes}
        self._schedules: dict[int, list[BodyItem]] = {}

    def operator(self, name: str) -> NodeDecl:
        return self._nodes[name]

    def node(self, node: NodeDecl | str) -> NodeDecl:
        return self._nodes[node] if isinstance(node, str) else node

    def schedule(self, items: Sequence[BodyItem]) -> list[BodyItem]:
        key = id(items)
        if key not in self._schedules:
            self._schedules[key] = order_items(items)
        return self._schedules[key]

    def init_state(self, node: NodeDecl | str) -> NodeState:
        node = self.node(node)
        buffers: dict[int, tuple[Value, ...]] = {}
        automata: dict[str, str] = {}
        for item in walk_items(node.body):
            if isinstance(item, Equation) and isinstance(item.rhs, Fby):
                init = evaluate_constant(item.rhs.init, self.consts)
                buffers[item.rhs.instance] = (init,) * item.rhs.depth
            elif isinstance(item, StateMachine):
                automata[item.name] = item.initial.name
        return NodeState(buffers, automata)

    def step(
        self, node: NodeDecl | str, state: NodeState, inputs: Mapping[str, Value]
    ) -> tuple[dict[str, Value], NodeState]:
        node = self.node(node)
        frame = _Cycle(self, node, state)
        frame.declare(node.inputs)
        frame.declare(node.outputs)
        frame.declare(node.locals)
        for decl in node.inputs:
            if decl.name not in inputs:
                raise frame.fault(DiagnosticKind.MISSING_INPUT, f"missing input '{decl.name}'")
            value = inputs[decl.name]
            if not value_in_type(value, decl.type):
                raise frame.fault(
                    DiagnosticKind.PRE_VIOLATION,
                    f"input {decl.name}={format_value(value)} is outside {type_name(decl.type)}",
                )
            frame.env[decl.name] = value
        frame.run(node.body)
        outputs = {decl.name: frame.env[decl.name] for decl in node.outputs}
        return outputs, NodeState(frame.shifted_buffers(), frame.sm_states)

    def call(self, op: NodeDecl | str, args: Sequence[Value]) -> tuple[Value, ...]:
        """Run a stateless operator on positional arguments."""
        op = self.node(op)
        frame = _Cycle(self, op, self.init_state(op))
        frame.declare(op.inputs)
        frame.declare(op.outputs)
        frame.declare(op.locals)
        for decl, value in zip(op.inputs, args):
            if not value_in_type(value, decl.type):
                raise frame.fault(
                    DiagnosticKind.RANGE_ERROR,
                    f"argument {decl.name}={format_value(value)} is outside {type_name(decl.type)}",
                )
            frame.env[decl.name] = value
        frame.run(op.body)
        return tuple(frame.env[decl.name] for decl in op.outputs)

    def eval_app(self, app: HigherOrderApp, evaluate) -> HofResult:
        op = self.operator(app.op)
        return eval_higher_order(
            app.variant,
            lambda args: self.call(op, args),
            app.length,
            app.acc_count,
            map_output_count(app, op),
            evaluate(app.init_cond) if app.init_cond is not None else None,
            [evaluate(d) for d in app.defaults],
            [evaluate(a) for a in app.acc_inits],
            [evaluate(a) for a in app.array_args],
        )

    def run(self, node: NodeDecl | str, cycles: Sequence[Mapping[str, Value]]) -> list[tuple[dict[str, Value], NodeState]]:
        state = self.init_state(node)
        history: list[tuple[dict[str, Value], NodeState]] = []
        for inputs in cycles:
            outputs, state = self.step(node, state, inputs)
            history.append((outputs, state))
        return history


def init_state(program: TypedProgram, node: NodeDecl | str) -> NodeState:
    return ScadeInterpreter(program).init_state(node)


def step(
    program: TypedProgram, node: NodeDecl | str, state: NodeState, inputs: Mapping[str, Value]
) -> tuple[dict[str, Value], NodeState]:
    return ScadeInterpreter(program).step(node, state, inputs)


def eval_app(program: TypedProgram, app: HigherOrderApp, args: Mapping[str, Value] | None = None) -> HofResult:
    """Evaluate a typed iterator application against variable values."""
    interpreter = ScadeInterpreter(program)
    frame = _Cycle(interpreter, NodeDecl("node", "<eval>", (), (), (), ()), NodeState())
    frame.env.update(args or {})
    return interpreter.eval_app(app, frame.eval)
