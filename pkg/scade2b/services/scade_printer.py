"""Canonical pretty-printer for the SCADE subset; diagnostics quote expressions with it.

The output re-parses to a structurally identical program: automata are always
named, non-atomic operands are parenthesized and mapfold accumulator counts are
written out.
"""
from __future__ import annotations

from scade2b.models.scade_ast import (
    Action,
    ActivateIf,
    ArrayIndex,
    ArrayType,
    BaseType,
    Binary,
    BoolLit,
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
    StateDecl,
    StateMachine,
    StructMake,
    StructType,
    TypeExpr,
    Unary,
    VarDecl,
    VarRef,
)

INDENT = "  "

_ATOMS = (IntLit, BoolLit, VarRef, EnumLit, ConstRef, Fby, StructMake, HigherOrderApp, FieldAccess, ArrayIndex)


def print_type(ty: TypeExpr) -> str:
    if isinstance(ty, ArrayType):
        return f"{print_type(ty.elem)} ^ {ty.size}"
    if isinstance(ty, (BaseType, NamedType)):
        return ty.name
    if isinstance(ty, (EnumType, StructType)):
        return ty.name
    raise TypeError(f"cannot print type {ty!r}")


def _atom(expr: Expr) -> str:
    if isinstance(expr, IntLit) and expr.value < 0:
        return f"(-{-expr.value})"
    if isinstance(expr, _ATOMS):
        return print_expr(expr)
    return f"({print_expr(expr)})"


def print_expr(expr: Expr) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value) if expr.value >= 0 else f"-{-expr.value}"
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, (VarRef, EnumLit, ConstRef)):
        return expr.name
    if isinstance(expr, Unary):
        if expr.op == "not":
            return f"not {_atom(expr.operand)}"
        return f"-{_atom(expr.operand)}"
    if isinstance(expr, Binary):
        return f"{_atom(expr.left)} {expr.op} {_atom(expr.right)}"
    if isinstance(expr, IfThenElse):
        cond = _atom(expr.cond) if isinstance(expr.cond, IfThenElse) else print_expr(expr.cond)
        then = _atom(expr.then) if isinstance(expr.then, IfThenElse) else print_expr(expr.then)
        return f"if {cond} then {then} else {print_expr(expr.else_)}"
    if isinstance(expr, CaseOf):
        arms = " ".join(
            f"| {'_' if arm.pattern is None else print_expr(arm.pattern)} : {print_expr(arm.body)}"
            for arm in expr.arms
        )
        return f"(case {print_expr(expr.scrutinee)} of {arms})"
    if isinstance(expr, Fby):
        return f"fby({print_expr(expr.input)}; {expr.depth}; {print_expr(expr.init)})"
    if isinstance(expr, StructMake):
        return f"(make {expr.type_name})({', '.join(print_expr(a) for a in expr.args)})"
    if isinstance(expr, FieldAccess):
        return f"{_atom(expr.target)}.{expr.field}"
    if isinstance(expr, ArrayIndex):
        return f"{_atom(expr.target)}[{print_expr(expr.index)}]"
    if isinstance(expr, HigherOrderApp):
        return _print_hof(expr)
    raise TypeError(f"cannot print expression {expr!r}")


def _print_hof(app: HigherOrderApp) -> str:
    head = app.variant
    if app.family == "mapfold":
        head += f" {app.acc_count}"
    head += f" {app.op} <<{app.size}>>"
    if app.init_cond is not None:
        head += f" if {print_expr(app.init_cond)}"
        if app.defaults:
            if len(app.defaults) == 1:
                head += f" default {_atom(app.defaults[0])}"
            else:
                head += f" default ({', '.join(print_expr(d) for d in app.defaults)})"
    args = ", ".join(print_expr(a) for a in (*app.acc_inits, *app.array_args))
    return f"({head})({args})"


class _Printer:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def emit(self, depth: int, text: str) -> None:
        self.lines.append(f"{INDENT * depth}{text}")

    def var_block(self, depth: int, decls: tuple[VarDecl, ...]) -> None:
        if not decls:
            return
        self.emit(depth, "var")
        for decl in decls:
            self.emit(depth + 1, f"{decl.name}: {print_type(decl.type)};")

    def items(self, depth: int, items) -> None:
        for item in items:
            if isinstance(item, Equation):
                self.emit(depth, f"{', '.join(item.lhs)} = {print_expr(item.rhs)};")
            elif isinstance(item, ActivateIf):
                self.activate(depth, item, "activate")
                self.emit(depth, "returns ..;")
            elif isinstance(item, StateMachine):
                self.automaton(depth, item)
            else:
                raise TypeError(f"cannot print item {item!r}")

    def activate(self, depth: int, block: ActivateIf, keyword: str) -> None:
        name = f" {block.name}" if block.name else ""
        self.emit(depth, f"{keyword}{name} if {print_expr(block.cond)}")
        self.emit(depth, "then")
        self.branch(depth + 1, block.then_branch)
        self.emit(depth, "else")
        self.branch(depth + 1, block.else_branch)

    def branch(self, depth: int, action: Action) -> None:
        if not action.locals and len(action.body) == 1 and isinstance(action.body[0], ActivateIf):
            self.activate(depth, action.body[0], "activate")
            return
        self.var_block(depth, action.locals)
        self.emit(depth, "let")
        self.items(depth + 1, action.body)
        self.emit(depth, "tel")

    def automaton(self, depth: int, sm: StateMachine) -> None:
        self.emit(depth, f"automaton {sm.name}")
        for state in sm.states:
            self.state(depth + 1, state)
        self.emit(depth, "returns ..;")

    def state(self, depth: int, state: StateDecl) -> None:
        prefix = "initial state" if state.is_initial else "state"
        self.emit(depth, f"{prefix} {state.name}")
        if state.transitions:
            self.emit(depth + 1, "unless")
            for tr in state.transitions:
                self.emit(depth + 2, f"if {print_expr(tr.cond)} restart {tr.target};")
        if state.locals or state.body:
            self.var_block(depth + 1, state.locals)
            self.emit(depth + 1, "let")
            self.items(depth + 2, state.body)
            self.emit(depth + 1, "tel")

    def node(self, node: NodeDecl) -> None:
        inputs = "; ".join(f"{d.name}: {print_type(d.type)}" for d in node.inputs)
        outputs = "; ".join(f"{d.name}: {print_type(d.type)}" for d in node.outputs)
        header = f"{node.kind} {node.name}({inputs}) returns ({outputs})"
        if not node.locals and not node.body:
            self.emit(0, header + ";")
            return
        self.emit(0, header)
        self.var_block(0, node.locals)
        self.emit(0, "let")
        self.items(1, node.body)
        self.emit(0, "tel")


def _print_type_decl(name: str, ty: TypeExpr) -> str:
    if isinstance(ty, EnumType):
        return f"{name} = enum {{{', '.join(ty.members)}}};"
    if isinstance(ty, StructType):
        fields = ", ".join(f"{f}: {print_type(t)}" for f, t in ty.fields)
        return f"{name} = {{{fields}}};"
    return f"{name} = {print_type(ty)};"


def _print_const(decl: ConstDecl) -> str:
    return f"{decl.name}: {print_type(decl.type)} = {print_expr(decl.value)};"


def print_program(program: ScadeProgram) -> str:
    printer = _Printer()
    for pragma in program.pragmas:
        printer.emit(0, f"--@{pragma.kind} {pragma.text}".rstrip())
    if program.type_decls:
        printer.emit(0, "type")
        for decl in program.type_decls:
            printer.emit(1, _print_type_decl(decl.name, decl.type))
    if program.const_decls:
        printer.emit(0, "const")
        for decl in program.const_decls:
            printer.emit(1, _print_const(decl))
    for node in program.nodes:
        printer.emit(0, "")
        printer.node(node)
    return "\n".join(printer.lines) + "\n"
