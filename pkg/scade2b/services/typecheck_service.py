from __future__ import annotations

import logging
from collections import Counter
from dataclasses import replace

from scade2b.core.errors import ScadeNameError, ScadeTypeError
from scade2b.models.scade_ast import (
    BOOL,
    INT_LITERAL,
    Action,
    ActivateIf,
    ArrayIndex,
    ArrayType,
    BaseType,
    Binary,
    BodyItem,
    BoolLit,
    CaseArm,
    CaseOf,
    ConstDecl,
    ConstRef,
    EnumLit,
    EnumType,
    Equation,
    Expr,
    Fby,
    FieldAccess,
    HigherOrderApp,
    IfThenElse,
    IntLit,
    NamedType,
    NodeDecl,
    ScadeProgram,
    SourcePos,
    StateDecl,
    StateMachine,
    StructMake,
    StructType,
    Transition,
    TypeDecl,
    TypeExpr,
    TypedProgram,
    Unary,
    VarDecl,
    VarRef,
    type_name,
    walk_expr,
    walk_items,
    item_expressions,
)
from scade2b.models.values import ArrayValue, EnumMember, RecordValue, Value, div_trunc, mod_trunc
from scade2b.services.dependency_service import item_defs
from scade2b.services.hof_semantics import HofLayout, hof_layout
from scade2b.services.scade_printer import print_expr

logger = logging.getLogger(__name__)

ARITHMETIC = ("+", "-", "*", "/", "mod")
ORDERING = ("<", "<=", ">", ">=")
EQUALITY = ("=", "<>")


def is_int(ty: TypeExpr | None) -> bool:
    return isinstance(ty, BaseType) and ty.is_int


def same_type(a: TypeExpr | None, b: TypeExpr | None) -> bool:
    if isinstance(a, ArrayType) and isinstance(b, ArrayType):
        return a.length == b.length and same_type(a.elem, b.elem)
    if isinstance(a, StructType) and isinstance(b, StructType):
        return a.name == b.name
    return a == b


def value_in_type(value: Value, ty: TypeExpr) -> bool:
    if isinstance(ty, BaseType):
        if ty.name == "bool":
            return isinstance(value, bool)
        if isinstance(value, bool) or not isinstance(value, int):
            return False
        bounds = ty.bounds
        return bounds is None or bounds[0] <= value <= bounds[1]
    if isinstance(ty, EnumType):
        return isinstance(value, EnumMember) and value.name in ty.members
    if isinstance(ty, ArrayType):
        return (
            isinstance(value, ArrayValue)
            and len(value) == ty.length
            and all(value_in_type(cell, ty.elem) for cell in value.cells)
        )
    if isinstance(ty, StructType):
        return (
            isinstance(value, RecordValue)
            and value.names == tuple(f for f, _ in ty.fields)
            and all(value_in_type(value.get(f), t) for f, t in ty.fields)
        )
    return False


def zero_value(ty: TypeExpr) -> Value:
    """The value a flow of this type holds before anything is written."""
    if isinstance(ty, BaseType):
        if ty.name == "bool":
            return False
        bounds = ty.bounds
        return 0 if bounds is None or bounds[0] <= 0 <= bounds[1] else bounds[0]
    if isinstance(ty, EnumType):
        return EnumMember(ty.members[0])
    if isinstance(ty, ArrayType):
        return ArrayValue(tuple(zero_value(ty.elem) for _ in range(ty.length or 0)))
    if isinstance(ty, StructType):
        return RecordValue(tuple((f, zero_value(t)) for f, t in ty.fields))
    raise TypeError(f"unresolved type {ty!r}")


def evaluate_constant(expr: Expr, consts: dict[str, Value]) -> Value | None:
    """Fold a compile-time expression; None when it is not one."""
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, EnumLit):
        return EnumMember(expr.name)
    if isinstance(expr, (ConstRef, VarRef)):
        return consts.get(expr.name)
    if isinstance(expr, Unary):
        inner = evaluate_constant(expr.operand, consts)
        if expr.op == "-" and isinstance(inner, int) and not isinstance(inner, bool):
            return -inner
        if expr.op == "not" and isinstance(inner, bool):
            return not inner
        return None
    if isinstance(expr, Binary) and expr.op in ARITHMETIC:
        left = evaluate_constant(expr.left, consts)
        right = evaluate_constant(expr.right, consts)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (left, right)):
            return None
        try:
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            if expr.op == "/":
                return div_trunc(left, right)
            return mod_trunc(left, right)
        except ZeroDivisionError:
            return None
    if isinstance(expr, StructMake) and expr.ty is not None:
        values = [evaluate_constant(a, consts) for a in expr.args]
        if any(v is None for v in values):
            return None
        return RecordValue(tuple(zip((f for f, _ in expr.ty.fields), values)))
    return None


def const_values(program: TypedProgram) -> dict[str, Value]:
    values: dict[str, Value] = {}
    for decl in program.const_decls:
        values[decl.name] = evaluate_constant(decl.value, values)
    return values


def is_stateless(node: NodeDecl) -> bool:
    if node.kind == "function":
        return True
    for item in walk_items(node.body):
        if isinstance(item, StateMachine):
            return False
        for expr in item_expressions(item):
            if any(isinstance(e, Fby) for e in walk_expr(expr)):
                return False
    return True


def map_output_count(app: HigherOrderApp, op: NodeDecl) -> int:
    return len(op.outputs) - app.acc_count - (1 if app.conditional else 0)


class TypeEnv:
    """Program-wide declarations: types, enum members, constants, operators."""

    def __init__(self, program: ScadeProgram, filename: str | None):
        self.filename = filename
        self.types: dict[str, TypeExpr] = {}
        self.members: dict[str, EnumType] = {}
        self.consts: dict[str, TypeExpr] = {}
        self.const_values: dict[str, Value] = {}
        self.nodes: dict[str, NodeDecl] = {n.name: n for n in program.nodes}
        self.global_names: set[str] = set()

    def error(self, message: str, pos: SourcePos | None) -> ScadeTypeError:
        return ScadeTypeError(message, pos, self.filename)

    def name_error(self, message: str, pos: SourcePos | None) -> ScadeNameError:
        return ScadeNameError(message, pos, self.filename)

    def resolve(self, ty: TypeExpr, pos: SourcePos | None) -> TypeExpr:
        if isinstance(ty, BaseType):
            return ty
        if isinstance(ty, NamedType):
            if ty.name not in self.types:
                raise self.name_error(f"unknown type '{ty.name}'", pos)
            return self.types[ty.name]
        if isinstance(ty, EnumType):
            return ty
        if isinstance(ty, StructType):
            return StructType(ty.name, tuple((f, self.resolve(t, pos)) for f, t in ty.fields))
        if isinstance(ty, ArrayType):
            return ArrayType(self.resolve(ty.elem, pos), ty.size, self.array_length(ty.size, pos))
        raise self.error(f"unsupported type {ty!r}", pos)

    def array_length(self, size: int | str, pos: SourcePos | None) -> int:
        if isinstance(size, str):
            if size not in self.const_values:
                raise self.name_error(f"unknown constant '{size}' used as a size", pos)
            value = self.const_values[size]
            if isinstance(value, bool) or not isinstance(value, int):
                raise self.error(f"size '{size}' is not an integer constant", pos)
            size = value
        if size < 1:
            raise self.error(f"array size must be at least 1, got {size}", pos)
        return size


class _NodeChecker:
    def __init__(self, env: TypeEnv, node: NodeDecl):
        self.env = env
        self.node = node
        self.kinds: dict[str, str] = {}

    @property
    def filename(self) -> str | None:
        return self.env.filename

    def error(self, message: str, pos) -> ScadeTypeError:
        return self.env.error(message, pos)

    # ---- declarations and scopes ----
    def declare(self, decls, scope: dict[str, TypeExpr], kind: str) -> tuple[VarDecl, ...]:
        resolved: list[VarDecl] = []
        for decl in decls:
            if decl.name in scope:
                raise self.env.name_error(f"duplicate declaration of '{decl.name}'", decl.pos)
            if decl.name in self.env.members or decl.name in self.env.consts:
                raise self.env.name_error(f"'{decl.name}' shadows a global declaration", decl.pos)
            ty = self.env.resolve(decl.type, decl.pos)
            scope[decl.name] = ty
            self.kinds[decl.name] = kind
            resolved.append(VarDecl(decl.name, ty, pos=decl.pos))
        return tuple(resolved)

    def check(self) -> NodeDecl:
        scope: dict[str, TypeExpr] = {}
        inputs = self.declare(self.node.inputs, scope, "input")
        outputs = self.declare(self.node.outputs, scope, "output")
        locals_ = self.declare(self.node.locals, scope, "local")
        body = tuple(self.item(item, scope, 0) for item in self.node.body)
        self.check_definitions([d.name for d in outputs + locals_], body, self.node.pos)
        return replace(self.node, inputs=inputs, outputs=outputs, locals=locals_, body=body)

    def check_definitions(self, required, items, pos) -> None:
        counts = Counter(name for item in items for name in item_defs(item))
        for name, count in counts.items():
            if count > 1:
                raise self.error(f"'{name}' is defined {count} times", pos)
        for name in required:
            if name not in counts:
                raise self.env.name_error(f"'{name}' is never defined", pos)

    # ---- body items ----
    def item(self, item: BodyItem, scope, level: int) -> BodyItem:
        if isinstance(item, Equation):
            return self.equation(item, scope, level)
        if isinstance(item, ActivateIf):
            return self.activate(item, scope, level)
        if isinstance(item, StateMachine):
            return self.automaton(item, scope, level)
        raise self.error(f"unsupported item {item!r}", getattr(item, "pos", None))

    def action(self, action: Action, scope, level: int) -> Action:
        inner = dict(scope)
        locals_ = self.declare(action.locals, inner, "local")
        body = tuple(self.item(i, inner, level + 1) for i in action.body)
        self.check_definitions([d.name for d in locals_], body, action.pos)
        return Action(locals_, body, pos=action.pos)

    def activate(self, block: ActivateIf, scope, level: int) -> ActivateIf:
        cond = self.expect_bool(self.expr(block.cond, scope), "activate condition")
        then_branch = self.action(block.then_branch, scope, level)
        else_branch = self.action(block.else_branch, scope, level)
        typed = ActivateIf(cond, then_branch, else_branch, block.name, pos=block.pos)
        then_defs = set(item_defs(ActivateIf(cond, then_branch, then_branch)))
        else_defs = set(item_defs(ActivateIf(cond, else_branch, else_branch)))
        if then_defs != else_defs:
            missing = ", ".join(sorted(then_defs ^ else_defs))
            raise self.error(f"branches of the activate block define different variables: {missing}", block.pos)
        return typed

    def automaton(self, sm: StateMachine, scope, level: int) -> StateMachine:
        if self.node.kind == "function":
            raise self.error("automata are not allowed in a function", sm.pos)
        initial = [s for s in sm.states if s.is_initial]
        if len(initial) != 1:
            raise self.error(f"automaton {sm.name} must have exactly one initial state", sm.pos)
        self.claim_global(sm.name, sm.pos)
        names = [s.name for s in sm.states]
        for state in sm.states:
            self.claim_global(state.name, state.pos)
        states: list[StateDecl] = []
        defs: list[set[str]] = []
        for state in sm.states:
            transitions = []
            for tr in state.transitions:
                if tr.target not in names:
                    raise self.env.name_error(f"unknown state '{tr.target}' in automaton {sm.name}", tr.pos)
                cond = self.expect_bool(self.expr(tr.cond, scope), "transition condition")
                transitions.append(Transition(cond, tr.target, pos=tr.pos))
            body_action = self.action(Action(state.locals, state.body, pos=state.pos), scope, level)
            states.append(
                StateDecl(state.name, state.is_initial, tuple(transitions), body_action.locals, body_action.body, pos=state.pos)
            )
            local_names = {d.name for d in body_action.locals}
            defs.append({n for i in body_action.body for n in item_defs(i)} - local_names)
        if any(d != defs[0] for d in defs):
            raise self.error(f"states of automaton {sm.name} define different variables", sm.pos)
        return StateMachine(sm.name, tuple(states), pos=sm.pos)

    def claim_global(self, name: str, pos) -> None:
        if name in self.env.global_names or name in self.env.members or name in self.env.types:
            raise self.env.name_error(f"duplicate declaration of '{name}'", pos)
        self.env.global_names.add(name)

    def equation(self, eq: Equation, scope, level: int) -> Equation:
        for name in eq.lhs:
            if name not in scope:
                raise self.env.name_error(f"unknown variable '{name}'", eq.pos)
            if self.kinds.get(name) == "input":
                raise self.error(f"cannot define input '{name}'", eq.pos)
        rhs = eq.rhs
        if isinstance(rhs, HigherOrderApp):
            return Equation(eq.lhs, self.higher_order(rhs, eq, scope), pos=eq.pos)
        if len(eq.lhs) != 1:
            raise self.error("only a higher-order application may define several variables", eq.pos)
        target = scope[eq.lhs[0]]
        if isinstance(rhs, Fby):
            if self.node.kind == "function":
                raise self.error("fby is not allowed in a function", rhs.pos)
            if level != 0:
                raise self.error("fby must appear in a node-level equation", rhs.pos)
            return Equation(eq.lhs, self.fby(rhs, target, scope), pos=eq.pos)
        typed = self.expr(rhs, scope)
        self.assignable(typed, target, f"'{eq.lhs[0]}'")
        return Equation(eq.lhs, self.retag(typed, target), pos=eq.pos)

    def fby(self, fby: Fby, target: TypeExpr, scope) -> Fby:
        if fby.depth < 1:
            raise self.error(f"fby depth must be at least 1, got {fby.depth}", fby.pos)
        input_ = self.expr(fby.input, scope)
        self.assignable(input_, target, "fby input")
        init = fby.init
        literal = isinstance(init, (IntLit, BoolLit)) or (
            isinstance(init, Unary) and init.op == "-" and isinstance(init.operand, IntLit)
        )
        typed_init = self.expr(init, {})
        if not literal and not isinstance(typed_init, (EnumLit, ConstRef)):
            raise self.error("fby initial value must be a literal", init.pos)
        self.assignable(typed_init, target, "fby initial value")
        return Fby(self.retag(input_, target), fby.depth, self.retag(typed_init, target), fby.instance, pos=fby.pos, ty=target)

    def higher_order(self, app: HigherOrderApp, eq: Equation, scope) -> HigherOrderApp:
        env = self.env
        op = env.nodes.get(app.op)
        if op is None:
            raise env.name_error(f"unknown operator '{app.op}'", app.pos)
        if op.name == self.node.name:
            raise self.error(f"operator '{op.name}' cannot iterate itself", app.pos)
        if not is_stateless(op):
            raise self.error(f"operator '{op.name}' of {app.variant} must be stateless", app.pos)
        length = env.array_length(app.size, app.pos)
        in_types = [env.resolve(d.type, d.pos) for d in op.inputs]
        out_types = [env.resolve(d.type, d.pos) for d in op.outputs]
        first = 1 if app.indexed else 0
        acc = app.acc_count
        cond_out = 1 if app.conditional else 0
        n = len(in_types) - first - acc
        m = len(out_types) - acc - cond_out
        if n < 0 or n != len(app.array_args):
            raise self.error(
                f"arity error: {app.variant} of '{op.name}' passes {first + acc + len(app.array_args)} "
                f"argument(s), the operator takes {len(in_types)}",
                app.pos,
            )
        if m < 0 or (app.family == "fold" and m != 0) or (app.family == "map" and m < 1):
            raise self.error(f"arity error: '{op.name}' returns {len(out_types)} value(s), which does not fit {app.variant}", app.pos)
        if app.indexed:
            index_ty = in_types[0]
            if not is_int(index_ty) or (index_ty.bounds and not index_ty.bounds[0] <= 0 <= length - 1 <= index_ty.bounds[1]):
                raise self.error(f"the index input of '{op.name}' cannot hold 0..{length - 1}", app.pos)
        if app.conditional and out_types[0] != BOOL:
            raise self.error(f"the first output of '{op.name}' must be bool for {app.variant}", app.pos)
        acc_in = in_types[first:first + acc]
        acc_out = out_types[cond_out:cond_out + acc]
        elem_in = in_types[first + acc:]
        v_out = out_types[cond_out + acc:]
        for k, (a_in, a_out) in enumerate(zip(acc_in, acc_out)):
            if not same_type(a_in, a_out):
                raise self.error(f"accumulator {k + 1} of '{op.name}' has input type {type_name(a_in)} but output type {type_name(a_out)}", app.pos)

        acc_inits = []
        for expr, ty in zip(app.acc_inits, acc_in):
            typed = self.expr(expr, scope)
            self.assignable(typed, ty, "accumulator initial value")
            acc_inits.append(self.retag(typed, ty))
        arrays = []
        for k, (expr, ty) in enumerate(zip(app.array_args, elem_in)):
            typed = self.expr(expr, scope)
            if not isinstance(typed.ty, ArrayType) or typed.ty.length != length:
                got = typed.ty.length if isinstance(typed.ty, ArrayType) else type_name(typed.ty)
                raise self.error(f"arity/size error: array argument {k + 1} has size {got}, expected {length}", expr.pos)
            if not same_type(typed.ty.elem, ty):
                raise self.error(
                    f"array argument {k + 1} holds {type_name(typed.ty.elem)}, '{op.name}' expects {type_name(ty)}",
                    expr.pos,
                )
            arrays.append(typed)
        init_cond = None
        defaults = []
        if app.conditional:
            if app.init_cond is None:
                raise self.error(f"{app.variant} needs an 'if' condition", app.pos)
            init_cond = self.expect_bool(self.expr(app.init_cond, scope), "initial condition")
            if app.family != "fold":
                if len(app.defaults) != m:
                    raise self.error(f"{app.variant} needs {m} default value(s), got {len(app.defaults)}", app.pos)
                for expr, ty in zip(app.defaults, v_out):
                    typed = self.expr(expr, scope)
                    self.assignable(typed, ty, "default value")
                    defaults.append(self.retag(typed, ty))
        typed_app = HigherOrderApp(
            app.variant, app.op, app.size, acc, init_cond, tuple(defaults), tuple(acc_inits), tuple(arrays),
            length, pos=app.pos,
        )
        try:
            layout = hof_layout(typed_app, eq.lhs, m)
        except ValueError as exc:
            raise self.error(str(exc), eq.pos) from None
        self.check_layout(layout, scope, acc_out, v_out, length, eq.pos)
        return replace(typed_app, ty=scope[eq.lhs[0]])

    def check_layout(self, layout: HofLayout, scope, acc_types, v_types, length: int, pos) -> None:
        if layout.idx is not None:
            ty = scope[layout.idx]
            if not is_int(ty) or (ty.bounds and not ty.bounds[0] <= 0 <= length <= ty.bounds[1]):
                raise self.error(f"'{layout.idx}' cannot hold an iteration count 0..{length}", pos)
        if layout.cond is not None and scope[layout.cond] != BOOL:
            raise self.error(f"'{layout.cond}' must be bool", pos)
        for name, ty in zip(layout.accs, acc_types):
            if not same_type(scope[name], ty):
                raise self.error(f"cannot assign {type_name(ty)} to '{name}' of type {type_name(scope[name])}", pos)
        for name, ty in zip(layout.outputs, v_types):
            expected = ArrayType(ty, length, length)
            if not same_type(scope[name], expected):
                raise self.error(
                    f"cannot assign {type_name(ty)}^{length} to '{name}' of type {type_name(scope[name])}", pos
                )

    # ---- expressions ----
    def expect_bool(self, expr: Expr, what: str) -> Expr:
        if expr.ty != BOOL:
            raise self.error(f"{what} '{print_expr(expr)}' must be bool, got {type_name(expr.ty)}", expr.pos)
        return expr

    def literal_value(self, expr: Expr) -> int | None:
        value = evaluate_constant(expr, self.env.const_values)
        if isinstance(value, bool) or not isinstance(value, int):
            return None
        return value

    def check_literal(self, expr: Expr, ty: TypeExpr) -> None:
        bounds = ty.bounds if isinstance(ty, BaseType) else None
        value = self.literal_value(expr)
        if bounds and value is not None and not bounds[0] <= value <= bounds[1]:
            raise self.error(f"literal {value} out of range {bounds[0]}..{bounds[1]} for {type_name(ty)}", expr.pos)

    def assignable(self, expr: Expr, target: TypeExpr, what: str) -> None:
        if same_type(expr.ty, target):
            return
        if expr.ty == INT_LITERAL and is_int(target):
            self.check_literal(expr, target)
            return
        raise self.error(f"cannot assign {type_name(expr.ty)} to {what} of type {type_name(target)}", expr.pos)

    def unify(self, left: Expr, right: Expr, pos, what: str) -> TypeExpr:
        if same_type(left.ty, right.ty):
            return left.ty
        if left.ty == INT_LITERAL and is_int(right.ty):
            self.check_literal(left, right.ty)
            return right.ty
        if right.ty == INT_LITERAL and is_int(left.ty):
            self.check_literal(right, left.ty)
            return left.ty
        raise self.error(f"type mismatch in {what}: {type_name(left.ty)} vs {type_name(right.ty)}", pos)

    @staticmethod
    def retag(expr: Expr, ty: TypeExpr) -> Expr:
        if expr.ty == INT_LITERAL and is_int(ty):
            return replace(expr, ty=ty)
        return expr

    def expr(self, expr: Expr, scope) -> Expr:
        env = self.env
        if isinstance(expr, IntLit):
            return replace(expr, ty=INT_LITERAL)
        if isinstance(expr, BoolLit):
            return replace(expr, ty=BOOL)
        if isinstance(expr, (VarRef, EnumLit, ConstRef)):
            name = expr.name
            if name in scope:
                return VarRef(name, pos=expr.pos, ty=scope[name])
            if name in env.members:
                return EnumLit(name, pos=expr.pos, ty=env.members[name])
            if name in env.consts:
                return ConstRef(name, pos=expr.pos, ty=env.consts[name])
            raise env.name_error(f"unknown identifier '{name}'", expr.pos)
        if isinstance(expr, Unary):
            operand = self.expr(expr.operand, scope)
            if expr.op == "not":
                self.expect_bool(operand, "operand of 'not'")
                return Unary("not", operand, pos=expr.pos, ty=BOOL)
            if not is_int(operand.ty):
                raise self.error(f"operand of unary '-' must be an integer, got {type_name(operand.ty)}", expr.pos)
            return Unary("-", operand, pos=expr.pos, ty=operand.ty)
        if isinstance(expr, Binary):
            return self.binary(expr, scope)
        if isinstance(expr, IfThenElse):
            cond = self.expect_bool(self.expr(expr.cond, scope), "if condition")
            then = self.expr(expr.then, scope)
            else_ = self.expr(expr.else_, scope)
            ty = self.unify(then, else_, expr.pos, "if branches")
            return IfThenElse(cond, self.retag(then, ty), self.retag(else_, ty), pos=expr.pos, ty=ty)
        if isinstance(expr, CaseOf):
            return self.case(expr, scope)
        if isinstance(expr, (Fby, HigherOrderApp)):
            what = "fby" if isinstance(expr, Fby) else "a higher-order application"
            raise self.error(f"{what} must be the whole right-hand side of an equation", expr.pos)
        if isinstance(expr, StructMake):
            ty = env.types.get(expr.type_name)
            if not isinstance(ty, StructType):
                raise env.name_error(f"'{expr.type_name}' is not a struct type", expr.pos)
            if len(expr.args) != len(ty.fields):
                raise self.error(
                    f"struct {ty.name} has {len(ty.fields)} field(s), {len(expr.args)} given", expr.pos
                )
            args = []
            for arg, (field, field_ty) in zip(expr.args, ty.fields):
                typed = self.expr(arg, scope)
                self.assignable(typed, field_ty, f"field '{field}'")
                args.append(self.retag(typed, field_ty))
            return StructMake(expr.type_name, tuple(args), pos=expr.pos, ty=ty)
        if isinstance(expr, FieldAccess):
            target = self.expr(expr.target, scope)
            if not isinstance(target.ty, StructType):
                raise self.error(f"field access on non-struct {type_name(target.ty)}", expr.pos)
            field_ty = target.ty.field_type(expr.field)
            if field_ty is None:
                raise env.name_error(f"struct {target.ty.name} has no field '{expr.field}'", expr.pos)
            return FieldAccess(target, expr.field, pos=expr.pos, ty=field_ty)
        if isinstance(expr, ArrayIndex):
            target = self.expr(expr.target, scope)
            if not isinstance(target.ty, ArrayType):
                raise self.error(f"indexing non-array {type_name(target.ty)}", expr.pos)
            index = self.expr(expr.index, scope)
            if not is_int(index.ty):
                raise self.error(f"array index must be an integer, got {type_name(index.ty)}", expr.pos)
            value = self.literal_value(index)
            if value is not None and not 0 <= value < target.ty.length:
                raise self.error(f"index {value} out of bounds 0..{target.ty.length - 1}", expr.pos)
            return ArrayIndex(target, index, pos=expr.pos, ty=target.ty.elem)
        raise self.error(f"unsupported expression {expr!r}", getattr(expr, "pos", None))

    def binary(self, expr: Binary, scope) -> Binary:
        left = self.expr(expr.left, scope)
        right = self.expr(expr.right, scope)
        op = expr.op
        if op in ("and", "or"):
            self.expect_bool(left, f"operand of '{op}'")
            self.expect_bool(right, f"operand of '{op}'")
            return Binary(op, left, right, pos=expr.pos, ty=BOOL)
        ty = self.unify(left, right, expr.pos, f"'{op}'")
        left, right = self.retag(left, ty), self.retag(right, ty)
        if op in EQUALITY:
            return Binary(op, left, right, pos=expr.pos, ty=BOOL)
        if not is_int(ty):
            raise self.error(f"'{op}' needs integer operands, got {type_name(ty)}", expr.pos)
        if op in ORDERING:
            return Binary(op, left, right, pos=expr.pos, ty=BOOL)
        return Binary(op, left, right, pos=expr.pos, ty=ty)

    def case(self, expr: CaseOf, scope) -> CaseOf:
        scrutinee = self.expr(expr.scrutinee, scope)
        sty = scrutinee.ty
        if not (is_int(sty) or sty == BOOL or isinstance(sty, EnumType)):
            raise self.error(f"cannot case on {type_name(sty)}", expr.pos)
        arms: list[CaseArm] = []
        seen: set = set()
        result_ty: TypeExpr | None = None
        has_default = False
        for position, arm in enumerate(expr.arms):
            pattern = None
            if arm.pattern is None:
                if position != len(expr.arms) - 1:
                    raise self.error("the '_' arm must come last", arm.pos)
                has_default = True
            else:
                pattern = self.expr(arm.pattern, {})
                key = evaluate_constant(pattern, self.env.const_values)
                if isinstance(pattern, EnumLit):
                    if pattern.ty != sty:
                        raise self.error(f"pattern {pattern.name} is not a member of {type_name(sty)}", arm.pos)
                elif isinstance(pattern, ConstRef) or key is None:
                    raise self.error("case patterns must be literals or enum members", arm.pos)
                else:
                    self.assignable(pattern, sty, "case pattern")
                if key in seen:
                    raise self.error(f"duplicate case pattern {arm.pattern!r}", arm.pos)
                seen.add(key)
                pattern = self.retag(pattern, sty)
            body = self.expr(arm.body, scope)
            if result_ty is None or same_type(result_ty, body.ty):
                result_ty = body.ty if result_ty is None else result_ty
            elif result_ty == INT_LITERAL and is_int(body.ty):
                for earlier in arms:
                    self.check_literal(earlier.body, body.ty)
                result_ty = body.ty
            elif body.ty == INT_LITERAL and is_int(result_ty):
                self.check_literal(body, result_ty)
            else:
                raise self.error(f"type mismatch in case arms: {type_name(result_ty)} vs {type_name(body.ty)}", arm.pos)
            arms.append(CaseArm(pattern, body, pos=arm.pos))
        exhaustive = (
            (isinstance(sty, EnumType) and seen >= {EnumMember(m) for m in sty.members})
            or (sty == BOOL and seen >= {True, False})
        )
        if not has_default and not exhaustive:
            raise self.error("non-exhaustive case needs a '_' arm", expr.pos)
        arms = [CaseArm(a.pattern, self.retag(a.body, result_ty), pos=a.pos) for a in arms]
        return CaseOf(scrutinee, tuple(arms), pos=expr.pos, ty=result_ty)


def _check_type_decl(decl: TypeDecl, env: TypeEnv) -> TypeDecl:
    ty = decl.type
    if isinstance(ty, StructType):
        names = [f for f, _ in ty.fields]
        if len(set(names)) != len(names):
            raise env.name_error(f"duplicate field in struct {decl.name}", decl.pos)
    resolved = env.resolve(ty, decl.pos)
    env.types[decl.name] = resolved
    return TypeDecl(decl.name, resolved, pos=decl.pos)


def _check_const_decl(decl: ConstDecl, env: TypeEnv, checker: "_NodeChecker") -> ConstDecl:
    ty = env.resolve(decl.type, decl.pos)
    typed = checker.expr(decl.value, {})
    checker.assignable(typed, ty, f"constant '{decl.name}'")
    value = evaluate_constant(typed, env.const_values)
    if value is None:
        raise env.error(f"constant '{decl.name}' is not a compile-time expression", decl.pos)
    if not value_in_type(value, ty):
        raise env.error(f"constant '{decl.name}' = {value!r} does not fit {type_name(ty)}", decl.pos)
    env.consts[decl.name] = ty
    env.const_values[decl.name] = value
    return ConstDecl(decl.name, ty, checker.retag(typed, ty), pos=decl.pos)


def _check_declarations(program: ScadeProgram, env: TypeEnv) -> tuple[tuple[TypeDecl, ...], tuple[ConstDecl, ...]]:
    for decl in program.type_decls:
        if isinstance(decl.type, EnumType):
            for member in decl.type.members:
                env.members[member] = decl.type

    # types may be sized by constants and constants typed by declared types,
    # so keep resolving until nothing is left or nothing moves
    checker = _NodeChecker(env, NodeDecl("function", "<constants>", (), (), (), ()))
    typed_types: dict[str, TypeDecl] = {}
    typed_consts: dict[str, ConstDecl] = {}
    pending: list[TypeDecl | ConstDecl] = [*program.type_decls, *program.const_decls]
    while pending:
        deferred: list[TypeDecl | ConstDecl] = []
        first_error: ScadeNameError | None = None
        for decl in pending:
            try:
                if isinstance(decl, TypeDecl):
                    typed_types[decl.name] = _check_type_decl(decl, env)
                else:
                    typed_consts[decl.name] = _check_const_decl(decl, env, checker)
            except ScadeNameError as exc:
                first_error = first_error or exc
                deferred.append(decl)
        if len(deferred) == len(pending):
            raise first_error
        pending = deferred
    return (
        tuple(typed_types[d.name] for d in program.type_decls),
        tuple(typed_consts[d.name] for d in program.const_decls),
    )


def typecheck(program: ScadeProgram, filename: str | None = None) -> TypedProgram:
    env = TypeEnv(program, filename)
    type_decls, const_decls = _check_declarations(program, env)
    nodes = tuple(_NodeChecker(env, node).check() for node in program.nodes)
    logger.info("typechecked %d node(s)", len(nodes))
    return ScadeProgram(type_decls, const_decls, nodes, program.pragmas)
