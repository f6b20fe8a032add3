from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class SourcePos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# ---- types ----

class TypeExpr:
    pass


BASE_RANGES: dict[str, tuple[int, int]] = {
    "uint8": (0, 0xFF),
    "uint16": (0, 0xFFFF),
    "uint32": (0, 0xFFFFFFFF),
    "int8": (-0x80, 0x7F),
    "int16": (-0x8000, 0x7FFF),
    "int32": (-0x80000000, 0x7FFFFFFF),
}

BASE_TYPE_NAMES = frozenset(BASE_RANGES) | {"bool"}


@dataclass(frozen=True)
class BaseType(TypeExpr):
    name: str

    @property
    def is_int(self) -> bool:
        return self.name in BASE_RANGES or self.name == "int"

    @property
    def bounds(self) -> tuple[int, int] | None:
        return BASE_RANGES.get(self.name)


# type of integer literals before they meet a declared type
INT_LITERAL = BaseType("int")
BOOL = BaseType("bool")


@dataclass(frozen=True)
class NamedType(TypeExpr):
    name: str


@dataclass(frozen=True)
class EnumType(TypeExpr):
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class StructType(TypeExpr):
    name: str
    fields: tuple[tuple[str, TypeExpr], ...]

    def field_type(self, name: str) -> TypeExpr | None:
        for key, ty in self.fields:
            if key == name:
                return ty
        return None


@dataclass(frozen=True)
class ArrayType(TypeExpr):
    elem: TypeExpr
    size: int | str
    length: int | None = None


def type_name(ty: TypeExpr | None) -> str:
    if ty is None:
        return "?"
    if isinstance(ty, (BaseType, NamedType, EnumType, StructType)):
        return ty.name
    if isinstance(ty, ArrayType):
        return f"{type_name(ty.elem)}^{ty.size}"
    return repr(ty)


# ---- expressions ----

@dataclass(frozen=True)
class Node:
    pos: SourcePos | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Expr(Node):
    ty: TypeExpr | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


@dataclass(frozen=True)
class EnumLit(Expr):
    name: str


@dataclass(frozen=True)
class ConstRef(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class IfThenElse(Expr):
    cond: Expr
    then: Expr
    else_: Expr


@dataclass(frozen=True)
class CaseArm(Node):
    pattern: Expr | None  # None is the `_` arm
    body: Expr


@dataclass(frozen=True)
class CaseOf(Expr):
    scrutinee: Expr
    arms: tuple[CaseArm, ...]


@dataclass(frozen=True)
class Fby(Expr):
    input: Expr
    depth: int
    init: Expr
    instance: int = 0


@dataclass(frozen=True)
class StructMake(Expr):
    type_name: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class FieldAccess(Expr):
    target: Expr
    field: str


@dataclass(frozen=True)
class ArrayIndex(Expr):
    target: Expr
    index: Expr


HOF_VARIANTS = (
    "map", "mapi", "mapw", "mapwi",
    "fold", "foldi", "foldw", "foldwi",
    "mapfold", "mapfoldi", "mapfoldw", "mapfoldwi",
)


@dataclass(frozen=True)
class HigherOrderApp(Expr):
    variant: str
    op: str
    size: int | str
    acc_count: int = 0
    init_cond: Expr | None = None
    defaults: tuple[Expr, ...] = ()
    acc_inits: tuple[Expr, ...] = ()
    array_args: tuple[Expr, ...] = ()
    length: int | None = field(default=None, compare=False)

    @property
    def family(self) -> str:
        if self.variant.startswith("mapfold"):
            return "mapfold"
        if self.variant.startswith("fold"):
            return "fold"
        return "map"

    @property
    def indexed(self) -> bool:
        return self.variant.endswith("i")

    @property
    def conditional(self) -> bool:
        return self.variant.rstrip("i").endswith("w")


# ---- body items ----

@dataclass(frozen=True)
class VarDecl(Node):
    name: str
    type: TypeExpr


@dataclass(frozen=True)
class Equation(Node):
    lhs: tuple[str, ...]
    rhs: Expr


@dataclass(frozen=True)
class Action(Node):
    locals: tuple[VarDecl, ...]
    body: tuple["BodyItem", ...]


@dataclass(frozen=True)
class ActivateIf(Node):
    cond: Expr
    then_branch: Action
    else_branch: Action
    name: str | None = None


@dataclass(frozen=True)
class Transition(Node):
    cond: Expr
    target: str


@dataclass(frozen=True)
class StateDecl(Node):
    name: str
    is_initial: bool
    transitions: tuple[Transition, ...]
    locals: tuple[VarDecl, ...]
    body: tuple["BodyItem", ...]


@dataclass(frozen=True)
class StateMachine(Node):
    name: str
    states: tuple[StateDecl, ...]

    @property
    def initial(self) -> StateDecl:
        return next(s for s in self.states if s.is_initial)

    def state(self, name: str) -> StateDecl:
        return next(s for s in self.states if s.name == name)


BodyItem = Union[Equation, ActivateIf, StateMachine]


# ---- declarations ----

@dataclass(frozen=True)
class NodeDecl(Node):
    kind: str  # "node" or "function"
    name: str
    inputs: tuple[VarDecl, ...]
    outputs: tuple[VarDecl, ...]
    locals: tuple[VarDecl, ...]
    body: tuple[BodyItem, ...]


@dataclass(frozen=True)
class ConstDecl(Node):
    name: str
    type: TypeExpr
    value: Expr


@dataclass(frozen=True)
class TypeDecl(Node):
    name: str
    type: TypeExpr


@dataclass(frozen=True)
class Pragma(Node):
    kind: str
    text: str


@dataclass(frozen=True)
class ScadeProgram:
    type_decls: tuple[TypeDecl, ...] = ()
    const_decls: tuple[ConstDecl, ...] = ()
    nodes: tuple[NodeDecl, ...] = ()
    pragmas: tuple[Pragma, ...] = ()

    def node(self, name: str) -> NodeDecl:
        for node in self.nodes:
            if node.name == name:
                return node
        raise KeyError(name)

    def pragma_values(self, kind: str) -> list[Pragma]:
        return [p for p in self.pragmas if p.kind == kind]


# typecheck returns the same shape with every Expr.ty filled in
TypedProgram = ScadeProgram


def sub_expressions(expr: Expr) -> Iterator[Expr]:
    """Direct children of an expression."""
    if isinstance(expr, Unary):
        yield expr.operand
    elif isinstance(expr, Binary):
        yield expr.left
        yield expr.right
    elif isinstance(expr, IfThenElse):
        yield expr.cond
        yield expr.then
        yield expr.else_
    elif isinstance(expr, CaseOf):
        yield expr.scrutinee
        for arm in expr.arms:
            if arm.pattern is not None:
                yield arm.pattern
            yield arm.body
    elif isinstance(expr, Fby):
        yield expr.input
        yield expr.init
    elif isinstance(expr, StructMake):
        yield from expr.args
    elif isinstance(expr, FieldAccess):
        yield expr.target
    elif isinstance(expr, ArrayIndex):
        yield expr.target
        yield expr.index
    elif isinstance(expr, HigherOrderApp):
        if expr.init_cond is not None:
            yield expr.init_cond
        yield from expr.defaults
        yield from expr.acc_inits
        yield from expr.array_args


def walk_expr(expr: Expr) -> Iterator[Expr]:
    yield expr
    for child in sub_expressions(expr):
        yield from walk_expr(child)


def item_expressions(item: BodyItem) -> Iterator[Expr]:
    """Every expression of an item, nested scopes included."""
    if isinstance(item, Equation):
        yield item.rhs
    elif isinstance(item, ActivateIf):
        yield item.cond
        for branch in (item.then_branch, item.else_branch):
            for inner in branch.body:
                yield from item_expressions(inner)
    elif isinstance(item, StateMachine):
        for state in item.states:
            for tr in state.transitions:
                yield tr.cond
            for inner in state.body:
                yield from item_expressions(inner)


def walk_items(items) -> Iterator[BodyItem]:
    for item in items:
        yield item
        if isinstance(item, ActivateIf):
            yield from walk_items(item.then_branch.body)
            yield from walk_items(item.else_branch.body)
        elif isinstance(item, StateMachine):
            for state in item.states:
                yield from walk_items(state.body)
