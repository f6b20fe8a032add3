"""Animator for the machines the translator produces.

PRE, the machine INVARIANT and every WHILE INVARIANT/VARIANT are checked at
run time instead of being proved. Writes to typed variables are range checked
and parallel branches must write disjoint variables.
"""
from __future__ import annotations

import logging
from typing import Mapping, Sequence

from scade2b.core.errors import BInitialisationError, BRuntimeError, DiagnosticKind
from scade2b.models.b_ast import (
    Assign,
    BApply,
    BBinOp,
    BBool,
    BBoolOf,
    BConstFunction,
    BExpr,
    BField,
    BIdent,
    BInt,
    BInterval,
    BMachine,
    BMaplets,
    BNeg,
    BOperation,
    BRecord,
    BStructSet,
    BTotalFunction,
    Case,
    FunctionOverride,
    If,
    OpCall,
    PAnd,
    Parallel,
    PCompare,
    PForAll,
    PImplies,
    PMember,
    PNot,
    POr,
    Predicate,
    Seq,
    Skip,
    Substitution,
    Var,
    While,
    conjuncts,
)
from scade2b.models.b_sets import BOOL_SET, BSet, FiniteSet, FunctionSet, IntegerSet, IntervalSet, StructSet
from scade2b.models.runtime import BState, Diagnostic, InvariantCheck, InvokeResult
from scade2b.models.values import ArrayValue, EnumMember, RecordValue, Value, div_trunc, format_b_value, mod_trunc
from scade2b.services.b_emitter import render_predicate
from scade2b.services.b_validator import quantifier_range

logger = logging.getLogger(__name__)

BUILTIN_SETS: dict[str, BSet] = {
    "BOOL": BOOL_SET,
    "INTEGER": IntegerSet(),
    "NATURAL": IntegerSet(0),
    "NAT": IntervalSet(0, 2147483647),
    "INT": IntervalSet(-2147483647, 2147483647),
}


def _show(value) -> str:
    return str(value) if isinstance(value, BSet) else format_b_value(value)


class _Scope:
    def __init__(self, values: dict[str, Value] | None = None, types: dict[str, BSet | None] | None = None):
        self.values: dict[str, Value] = dict(values or {})
        self.types: dict[str, BSet | None] = dict(types or {})


class _Execution:
    """One operation activation: a scope stack plus the diagnostics it has collected."""

    def __init__(self, interpreter: "BInterpreter", where: str, scopes: list[_Scope], diagnostics: list[Diagnostic]):
        self.interpreter = interpreter
        self.where = where
        self.scopes = scopes
        self.diagnostics = diagnostics
        self.written: set[tuple[int, str]] = set()

    def fault(self, kind: DiagnosticKind, message: str, index: int | None = None) -> BRuntimeError:
        return BRuntimeError(kind, f"{self.where}: {message}", index)

    def fork(self) -> "_Execution":
        scopes = [_Scope(s.values, s.types) for s in self.scopes]
        return _Execution(self.interpreter, self.where, scopes, self.diagnostics)

    # ---- variables ----
    def _scope_of(self, name: str) -> int | None:
        for depth in range(len(self.scopes) - 1, -1, -1):
            if name in self.scopes[depth].types:
                return depth
        return None

    def read(self, name: str):
        depth = self._scope_of(name)
        if depth is not None:
            scope = self.scopes[depth]
            if name not in scope.values:
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"{name} is read before it is assigned")
            return scope.values[name]
        return self.interpreter.lookup(name, self)

    def write(self, name: str, value: Value) -> None:
        depth = self._scope_of(name)
        if depth is None:
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"assignment to undeclared {name}")
        scope = self.scopes[depth]
        expected = scope.types[name]
        if expected is not None and not expected.contains(value):
            raise self.fault(DiagnosticKind.RANGE_ERROR, f"{name} := {format_b_value(value)} is outside {expected}")
        scope.values[name] = value
        self.written.add((depth, name))

    def override(self, name: str, index: int, value: Value) -> None:
        function = self.read(name)
        self.apply(function, index)
        self.write(name, function.replace(index, value))

    def push(self, names: Sequence[str], typing: Sequence[Predicate]) -> None:
        types: dict[str, BSet | None] = dict.fromkeys(names)
        for part in typing:
            if isinstance(part, PMember) and isinstance(part.element, BIdent) and part.element.name in types:
                types[part.element.name] = self.set_value(part.set)
        self.scopes.append(_Scope(types=types))

    def pop(self) -> None:
        depth = len(self.scopes) - 1
        self.scopes.pop()
        self.written = {(d, n) for d, n in self.written if d < depth}

    # ---- expressions ----
    def eval(self, e: BExpr):
        if isinstance(e, BInt):
            return e.value
        if isinstance(e, BBool):
            return e.value
        if isinstance(e, BIdent):
            return self.read(e.name)
        if isinstance(e, BBinOp):
            left, right = self.integer(e.left), self.integer(e.right)
            if e.op == "+":
                return left + right
            if e.op == "-":
                return left - right
            if e.op == "*":
                return left * right
            try:
                return div_trunc(left, right) if e.op == "/" else mod_trunc(left, right)
            except ZeroDivisionError:
                raise self.fault(DiagnosticKind.DIVISION_BY_ZERO, f"{left} {e.op} 0") from None
        if isinstance(e, BNeg):
            return -self.integer(e.operand)
        if isinstance(e, BApply):
            return self.apply(self.eval(e.function), self.integer(e.arg))
        if isinstance(e, BField):
            target = self.eval(e.target)
            if not isinstance(target, RecordValue) or e.name not in target.names:
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"no field {e.name} in {_show(target)}")
            return target.get(e.name)
        if isinstance(e, BRecord):
            return RecordValue(tuple((name, self.eval(value)) for name, value in e.fields))
        if isinstance(e, BBoolOf):
            return self.holds(e.pred)
        if isinstance(e, BMaplets):
            pairs = sorted(((self.integer(k), self.eval(v)) for k, v in e.pairs), key=lambda pair: pair[0])
            if [k for k, _ in pairs] != list(range(len(pairs))):
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, "function literal is not indexed 0..n-1")
            return ArrayValue(tuple(v for _, v in pairs))
        if isinstance(e, BConstFunction):
            domain = self.interval(e.domain)
            if domain.low != 0:
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"function domain {domain} does not start at 0")
            return ArrayValue((self.eval(e.value),) * domain.size())
        return self.set_value(e)

    def set_value(self, e: BExpr) -> BSet:
        if isinstance(e, BInterval):
            return IntervalSet(self.integer(e.low), self.integer(e.high))
        if isinstance(e, BTotalFunction):
            return FunctionSet(self.interval(e.domain), self.set_value(e.range))
        if isinstance(e, BStructSet):
            return StructSet(tuple((name, self.set_value(s)) for name, s in e.fields))
        if isinstance(e, BIdent):
            value = self.read(e.name)
            if isinstance(value, BSet):
                return value
        raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"{type(e).__name__} is not a set")

    def integer(self, e: BExpr) -> int:
        value = self.eval(e)
        if not isinstance(value, int) or isinstance(value, bool):
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"{_show(value)} is not an integer")
        return value

    def interval(self, e: BExpr) -> IntervalSet:
        domain = self.set_value(e)
        if not isinstance(domain, IntervalSet):
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"{domain} is not an integer interval")
        return domain

    def apply(self, function, index: int) -> Value:
        if not isinstance(function, ArrayValue):
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"{_show(function)} is not a function")
        if not 0 <= index < len(function):
            raise self.fault(DiagnosticKind.INDEX_OUT_OF_BOUNDS, f"index {index} outside 0..{len(function) - 1}")
        return function[index]

    # ---- predicates ----
    def holds(self, p: Predicate) -> bool:
        if isinstance(p, PAnd):
            return all(self.holds(part) for part in p.parts)
        if isinstance(p, POr):
            return any(self.holds(part) for part in p.parts)
        if isinstance(p, PNot):
            return not self.holds(p.operand)
        if isinstance(p, PImplies):
            return not self.holds(p.left) or self.holds(p.right)
        if isinstance(p, PCompare):
            left, right = self.eval(p.left), self.eval(p.right)
            if p.op == "=":
                return left == right and type(left) is type(right)
            if p.op == "/=":
                return left != right or type(left) is not type(right)
            if any(not isinstance(v, int) or isinstance(v, bool) for v in (left, right)):
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"cannot order {_show(left)} and {_show(right)}")
            if p.op == "<":
                return left < right
            if p.op == "<=":
                return left <= right
            if p.op == ">":
                return left > right
            return left >= right
        if isinstance(p, PMember):
            return self.set_value(p.set).contains(self.eval(p.element))
        if isinstance(p, PForAll):
            bound = quantifier_range(p)
            if bound is None:
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"quantifier over {p.var} has no finite range")
            low, high = self.integer(bound.low), self.integer(bound.high)
            self.scopes.append(_Scope(types={p.var: None}))
            try:
                for value in range(low, high + 1):
                    self.scopes[-1].values[p.var] = value
                    if not self.holds(p.body):
                        return False
                return True
            finally:
                self.scopes.pop()
        raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"cannot evaluate {type(p).__name__}")

    # ---- substitutions ----
    def run(self, s: Substitution) -> None:
        if isinstance(s, Assign):
            self.write(s.name, self.eval(s.value))
        elif isinstance(s, FunctionOverride):
            self.override(s.name, self.integer(s.index), self.eval(s.value))
        elif isinstance(s, Skip):
            pass
        elif isinstance(s, Seq):
            for item in s.items:
                self.run(item)
        elif isinstance(s, Parallel):
            self.parallel(s)
        elif isinstance(s, If):
            for cond, body in s.branches:
                if self.holds(cond):
                    self.run(body)
                    return
            if s.else_ is not None:
                self.run(s.else_)
        elif isinstance(s, Case):
            self.case(s)
        elif isinstance(s, While):
            self.loop(s)
        elif isinstance(s, Var):
            self.push(s.names, s.typing)
            try:
                self.run(s.body)
            finally:
                self.pop()
        elif isinstance(s, OpCall):
            self.call(s)
        else:
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"cannot execute {type(s).__name__}")

    def parallel(self, s: Parallel) -> None:
        depth = len(self.scopes)
        owner: dict[tuple[int, str], int] = {}
        results: list[tuple[_Execution, set[tuple[int, str]]]] = []
        # every branch reads the values from before the parallel
        for position, branch in enumerate(s.items):
            fork = self.fork()
            fork.run(branch)
            writes = {(d, n) for d, n in fork.written if d < depth}
            for key in writes:
                if key in owner:
                    raise self.fault(
                        DiagnosticKind.NON_DISJOINT_PARALLEL,
                        f"parallel branches {owner[key] + 1} and {position + 1} both write {key[1]}",
                    )
                owner[key] = position
            results.append((fork, writes))
        for fork, writes in results:
            for d, name in writes:
                self.scopes[d].values[name] = fork.scopes[d].values[name]
            self.written |= writes

    def case(self, s: Case) -> None:
        scrutinee = self.eval(s.scrutinee)
        for labels, body in s.arms:
            for label in labels:
                value = self.eval(label)
                if value == scrutinee and type(value) is type(scrutinee):
                    self.run(body)
                    return
        if s.else_ is None:
            raise self.fault(DiagnosticKind.EVALUATION_ERROR, f"no CASE branch for {_show(scrutinee)}")
        self.run(s.else_)

    def loop(self, s: While) -> None:
        iteration = 0
        self.loop_invariant(s, iteration)
        while self.holds(s.condition):
            before = None
            if s.variant is not None:
                before = self.integer(s.variant)
                if before < 0:
                    raise self.fault(
                        DiagnosticKind.VARIANT_NON_DECREASE, f"variant {before} is not a natural number", iteration
                    )
            self.run(s.body)
            iteration += 1
            if before is not None:
                after = self.integer(s.variant)
                if after >= before:
                    raise self.fault(
                        DiagnosticKind.VARIANT_NON_DECREASE, f"variant went from {before} to {after}", iteration
                    )
            self.loop_invariant(s, iteration)

    def loop_invariant(self, s: While, iteration: int) -> None:
        if s.invariant is None:
            return
        for part in conjuncts(s.invariant):
            if not self.holds(part):
                diagnostic = Diagnostic(
                    DiagnosticKind.INVARIANT_VIOLATION,
                    f"WHILE in {self.where} iteration {iteration}",
                    render_predicate(part),
                )
                logger.warning("%s", diagnostic)
                self.diagnostics.append(diagnostic)
                return

    def call(self, s: OpCall) -> None:
        op = self.interpreter.operation(s.op)
        args = [self.eval(a) for a in s.args]
        # the called operation sees the machine variables, not our locals
        execution = _Execution(self.interpreter, op.name, [self.scopes[0]], self.diagnostics)
        outputs = self.interpreter.execute(execution, op, args)
        for target, name in zip(s.outputs, op.outputs):
            value = outputs[name]
            if isinstance(target, BIdent):
                self.write(target.name, value)
            elif isinstance(target, BApply) and isinstance(target.function, BIdent):
                self.override(target.function.name, self.integer(target.arg), value)
            else:
                raise self.fault(DiagnosticKind.EVALUATION_ERROR, "unsupported operation call target")


class BInterpreter:
    def __init__(self, machine: BMachine):
        self.machine = machine
        self.sets: dict[str, BSet] = dict(BUILTIN_SETS)
        self.members: dict[str, EnumMember] = {}
        for name, members in machine.sets:
            elements = tuple(EnumMember(m) for m in members)
            self.sets[name] = FiniteSet(name, elements)
            self.members.update((m.name, m) for m in elements)
        self.constants: dict[str, object] = {}
        self._load_constants()
        self.variable_types: dict[str, BSet | None] = self._variable_types()
        self._operations = {op.name: op for op in machine.operations}

    def _scratch(self, where: str) -> _Execution:
        return _Execution(self, where, [_Scope()], [])

    def _load_constants(self) -> None:
        execution = self._scratch("PROPERTIES")
        pending = []
        for prop in self.machine.properties:
            if (
                isinstance(prop, PCompare)
                and prop.op == "="
                and isinstance(prop.left, BIdent)
                and prop.left.name in self.machine.constants
                and prop.left.name not in self.constants
            ):
                self.constants[prop.left.name] = execution.eval(prop.right)
            else:
                pending.append(prop)
        missing = [c for c in self.machine.constants if c not in self.constants]
        if missing:
            raise BInitialisationError(f"constants without a defining property: {', '.join(missing)}")
        for prop in pending:
            if not execution.holds(prop):
                raise BInitialisationError(f"property does not hold: {render_predicate(prop)}")

    def _variable_types(self) -> dict[str, BSet | None]:
        types: dict[str, BSet | None] = dict.fromkeys(self.machine.variables)
        execution = self._scratch("INVARIANT")
        for part in self.machine.invariant:
            if isinstance(part, PMember) and isinstance(part.element, BIdent) and part.element.name in types:
                if types[part.element.name] is None:
                    types[part.element.name] = execution.set_value(part.set)
        return types

    def lookup(self, name: str, execution: _Execution):
        if name in self.constants:
            return self.constants[name]
        if name in self.sets:
            return self.sets[name]
        if name in self.members:
            return self.members[name]
        raise execution.fault(DiagnosticKind.EVALUATION_ERROR, f"unknown identifier {name}")

    def operation(self, name: str) -> BOperation:
        if name not in self._operations:
            raise BRuntimeError(DiagnosticKind.EVALUATION_ERROR, f"no operation {name} in {self.machine.name}")
        return self._operations[name]

    def parameter_types(self, op: BOperation | str) -> dict[str, BSet | None]:
        """Parameter sets as typed by the precondition."""
        op = self.operation(op) if isinstance(op, str) else op
        types: dict[str, BSet | None] = dict.fromkeys(op.params)
        execution = self._scratch(op.name)
        for part in conjuncts(op.precondition):
            if isinstance(part, PMember) and isinstance(part.element, BIdent) and part.element.name in types:
                if types[part.element.name] is None:
                    types[part.element.name] = execution.set_value(part.set)
        return types

    def _state_scope(self, state: BState | None) -> _Scope:
        return _Scope(state.as_dict() if state is not None else {}, self.variable_types)

    def _snapshot(self, scope: _Scope) -> BState:
        return BState(tuple((name, scope.values[name]) for name in self.machine.variables))

    def execute(self, execution: _Execution, op: BOperation, args: Sequence[Value]) -> dict[str, Value]:
        """Run an operation on top of the execution's machine scope; returns its outputs."""
        if len(args) != len(op.params):
            raise execution.fault(
                DiagnosticKind.MISSING_INPUT, f"{op.name} takes {len(op.params)} argument(s), got {len(args)}"
            )
        output_types: dict[str, BSet | None] = dict.fromkeys(op.outputs)
        for part in op.output_typing:
            if isinstance(part, PMember) and isinstance(part.element, BIdent) and part.element.name in output_types:
                output_types[part.element.name] = execution.set_value(part.set)
        types: dict[str, BSet | None] = dict.fromkeys(op.params)
        types.update(output_types)
        execution.scopes.append(_Scope(dict(zip(op.params, args)), types))
        if op.precondition is not None:
            for part in conjuncts(op.precondition):
                if not execution.holds(part):
                    raise execution.fault(DiagnosticKind.PRE_VIOLATION, f"PRE fails: {render_predicate(part)}")
        execution.run(op.body)
        frame = execution.scopes[-1]
        missing = [name for name in op.outputs if name not in frame.values]
        if missing:
            raise execution.fault(DiagnosticKind.EVALUATION_ERROR, f"output(s) never assigned: {', '.join(missing)}")
        return {name: frame.values[name] for name in op.outputs}

    def init_machine(self, check: bool = True) -> BState:
        """Run INITIALISATION; with ``check`` a violated INVARIANT is an error.

        Without ``check`` the writes are not range-checked, so a state outside the
        variable types reaches the caller and the INVARIANT names the failing conjunct.
        """
        scope = self._state_scope(None) if check else _Scope(types=dict.fromkeys(self.variable_types))
        execution = _Execution(self, "INITIALISATION", [scope], [])
        try:
            if self.machine.initialisation is not None:
                execution.run(self.machine.initialisation)
        except BRuntimeError as exc:
            raise BInitialisationError(str(exc)) from exc
        missing = [name for name in self.machine.variables if name not in scope.values]
        if missing:
            raise BInitialisationError(f"variables not initialised: {', '.join(missing)}")
        state = self._snapshot(scope)
        if check:
            verdict = self.check_invariant(state)
            if not verdict.holds:
                raise BInitialisationError(
                    f"INVARIANT conjunct {verdict.conjunct_index} does not hold after INITIALISATION: {verdict.conjunct}"
                )
        logger.debug("%s initialised: %s", self.machine.name, state.values)
        return state

    def invoke(
        self,
        state: BState,
        op_name: str,
        args: Mapping[str, Value] | Sequence[Value],
        report_violations: bool = False,
    ) -> InvokeResult:
        try:
            op = self.operation(op_name)
        except BRuntimeError as exc:
            return InvokeResult({}, state, (Diagnostic(exc.kind, op_name, exc.message),), exc.kind)
        if isinstance(args, Mapping):
            missing = [p for p in op.params if p not in args]
            if missing:
                detail = f"missing argument(s): {', '.join(missing)}"
                return InvokeResult(
                    {}, state, (Diagnostic(DiagnosticKind.MISSING_INPUT, op.name, detail),),
                    DiagnosticKind.MISSING_INPUT,
                )
            args = [args[p] for p in op.params]

        scope = self._state_scope(state)
        diagnostics: list[Diagnostic] = []
        execution = _Execution(self, op.name, [scope], diagnostics)
        try:
            outputs = self.execute(execution, op, list(args))
        except BRuntimeError as exc:
            diagnostics.append(Diagnostic(exc.kind, op.name, exc.message))
            return InvokeResult({}, state, tuple(diagnostics), exc.kind)

        new_state = self._snapshot(scope)
        check = self.check_invariant(new_state)
        if not check.holds:
            diagnostics.append(
                Diagnostic(DiagnosticKind.INVARIANT_VIOLATION, f"INVARIANT after {op.name}", check.conjunct or "")
            )
            if not report_violations:
                return InvokeResult(outputs, state, tuple(diagnostics), DiagnosticKind.INVARIANT_VIOLATION, False)
        return InvokeResult(outputs, new_state, tuple(diagnostics), None, check.holds)

    def check_invariant(self, state: BState) -> InvariantCheck:
        execution = _Execution(self, "INVARIANT", [self._state_scope(state)], [])
        for index, part in enumerate(self.machine.invariant):
            try:
                holds = execution.holds(part)
            except BRuntimeError as exc:
                logger.warning("INVARIANT conjunct %d cannot be evaluated: %s", index, exc)
                holds = False
            if not holds:
                return InvariantCheck(False, index, render_predicate(part))
        return InvariantCheck(True)


def init_machine(machine: BMachine) -> BState:
    return BInterpreter(machine).init_machine()


def invoke(
    machine: BMachine,
    state: BState,
    op_name: str,
    args: Mapping[str, Value] | Sequence[Value],
    report_violations: bool = False,
) -> InvokeResult:
    return BInterpreter(machine).invoke(state, op_name, args, report_violations)


def check_invariant(machine: BMachine, state: BState) -> InvariantCheck:
    return BInterpreter(machine).check_invariant(state)
