"""Translation of a typed SCADE program into one flat B machine.

Types become constants and sets, each ``node`` becomes an operation, fby
instances become buffer variables shifted at the end of the cycle, automata
become enumerated state variables and iterators become WHILE loops carrying
their INVARIANT and VARIANT.
"""
from __future__ import annotations

import logging
from typing import Callable, Mapping, Sequence, TypeVar

from scade2b.core.errors import TranslationError
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
    Parallel,
    PCompare,
    PForAll,
    PImplies,
    PMember,
    PNot,
    POr,
    Predicate,
    Skip,
    Substitution,
    Var,
    While,
    conjoin,
    seq,
)
from scade2b.models.scade_ast import (
    BASE_RANGES,
    ActivateIf,
    ArrayIndex,
    ArrayType,
    BaseType,
    Binary,
    BodyItem,
    BoolLit,
    CaseOf,
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
    NodeDecl,
    StateDecl,
    StateMachine,
    StructMake,
    StructType,
    TypedProgram,
    TypeExpr,
    Unary,
    VarDecl,
    VarRef,
    walk_expr,
    walk_items,
)
from scade2b.models.translation import NodeBinding, TranslationResult
from scade2b.models.values import ArrayValue, EnumMember, RecordValue, Value
from scade2b.services.b_parser import parse_predicate
from scade2b.services.dependency_service import expr_reads, item_defs, order_items
from scade2b.services.hof_semantics import HofLayout, hof_layout
from scade2b.services.inline_service import simplify_node
from scade2b.services.typecheck_service import const_values, evaluate_constant, map_output_count, zero_value

logger = logging.getLogger(__name__)
T = TypeVar("T")

B_RESERVED = frozenset(
    {
        "ABSTRACT_CONSTANTS", "ABSTRACT_VARIABLES", "ANY", "ASSERT", "ASSERTIONS", "BE", "BEGIN", "BOOL",
        "CASE", "CHOICE", "CONCRETE_CONSTANTS", "CONCRETE_VARIABLES", "CONSTANTS", "DEFINITIONS", "DO",
        "EITHER", "ELSE", "ELSIF", "END", "EXTENDS", "FALSE", "FIN", "IF", "IMPLEMENTATION", "IMPORTS",
        "IN", "INCLUDES", "INITIALISATION", "INT", "INTEGER", "INVARIANT", "LET", "MACHINE", "MAXINT",
        "MININT", "NAT", "NAT1", "NATURAL", "NATURAL1", "OF", "OPERATIONS", "OR", "POW", "PRE",
        "PROMOTES", "PROPERTIES", "REFINEMENT", "REFINES", "SEES", "SELECT", "SETS", "THEN", "TRUE",
        "USES", "VALUES", "VAR", "VARIABLES", "VARIANT", "WHEN", "WHERE", "WHILE",
        "bool", "card", "dom", "first", "id", "inter", "last", "max", "min", "mod", "not", "or", "pred",
        "ran", "rec", "seq", "size", "skip", "struct", "succ", "union",
    }
)

# canonical CONSTANTS order of the base types
BASE_ORDER = ("uint32", "uint16", "uint8", "int32", "int16", "int8")

COMPARE_OPS = {"=": "=", "<>": "/=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}
ARITHMETIC_OPS = {"+": "+", "-": "-", "*": "*", "/": "/", "mod": "mod"}


def _user_identifiers(program: TypedProgram) -> list[str]:
    names: list[str] = []
    for decl in program.type_decls:
        names.append(decl.name)
        if isinstance(decl.type, EnumType):
            names.extend(decl.type.members)
        elif isinstance(decl.type, StructType):
            names.extend(f for f, _ in decl.type.fields)
    names.extend(c.name for c in program.const_decls)
    for node in program.nodes:
        names.append(node.name)
        names.extend(d.name for d in (*node.inputs, *node.outputs, *node.locals))
        for item in walk_items(node.body):
            if isinstance(item, ActivateIf):
                names.extend(d.name for d in (*item.then_branch.locals, *item.else_branch.locals))
            elif isinstance(item, StateMachine):
                names.append(item.name)
                for state in item.states:
                    names.append(state.name)
                    names.extend(d.name for d in state.locals)
    return names


class TranslationContext:
    """Everything accumulated while translating: declarations, state variables, names."""

    def __init__(self, program: TypedProgram):
        self.names: dict[str, str] = {}
        users = _user_identifiers(program)
        self.taken: set[str] = {n for n in users if n not in B_RESERVED}
        for name in users:
            if name in B_RESERVED and name not in self.names:
                candidate = f"{name}_"
                while candidate in self.taken:
                    candidate += "_"
                self.names[name] = candidate
                self.taken.add(candidate)
        self.sets: list[tuple[str, tuple[str, ...]]] = []
        self.constants: list[tuple[str, Predicate]] = []
        self.structs: list[tuple[str, Predicate]] = []
        self.variables: list[tuple[str, Predicate, Substitution]] = []
        self._base_names: dict[str, str] = {}

    def mangle(self, name: str) -> str:
        return self.names.get(name, name)

    def fresh(self, base: str) -> str:
        """A machine-wide name no user identifier or earlier synthesized name uses."""
        candidate = self.local(base)
        self.taken.add(candidate)
        return candidate

    def local(self, base: str, avoid: set[str] | frozenset[str] = frozenset()) -> str:
        """A name for a VAR-scoped local; not reserved machine-wide."""
        candidate, k = base, 1
        while candidate in self.taken or candidate in avoid or candidate in B_RESERVED:
            candidate = f"{base}_{k}"
            k += 1
        return candidate

    def claim(self, name: str) -> str:
        if name in self.taken or name in B_RESERVED:
            raise TranslationError(f"state variable name '{name}' clashes with an existing identifier")
        self.taken.add(name)
        return name

    # ---- types ----
    def base_type(self, name: str) -> str:
        if name not in self._base_names:
            self._base_names[name] = self.fresh(f"{name}_t")
        return self._base_names[name]

    def type_set(self, ty: TypeExpr) -> BExpr:
        if isinstance(ty, BaseType):
            if ty.name == "bool":
                return BIdent("BOOL")
            if ty.bounds is None:
                return BIdent("INTEGER")
            return BIdent(self.base_type(ty.name))
        if isinstance(ty, (EnumType, StructType)):
            return BIdent(self.mangle(ty.name))
        if isinstance(ty, ArrayType):
            return BTotalFunction(BInterval(BInt(0), self.last_index(ty.size, ty.length)), self.type_set(ty.elem))
        raise TranslationError(f"cannot translate type {ty!r}")

    def typing(self, name: str, ty: TypeExpr) -> Predicate:
        return PMember(BIdent(name), self.type_set(ty))

    def size_expr(self, size: int | str, length: int | None) -> BExpr:
        return BIdent(self.mangle(size)) if isinstance(size, str) else BInt(length if length is not None else size)

    def last_index(self, size: int | str, length: int | None) -> BExpr:
        if isinstance(size, str):
            return BBinOp("-", BIdent(self.mangle(size)), BInt(1))
        return BInt((length if length is not None else size) - 1)

    def value_expr(self, value: Value) -> BExpr:
        if isinstance(value, bool):
            return BBool(value)
        if isinstance(value, int):
            return BInt(value)
        if isinstance(value, EnumMember):
            return BIdent(self.mangle(value.name))
        if isinstance(value, RecordValue):
            return BRecord(tuple((self.mangle(k), self.value_expr(v)) for k, v in value.fields))
        if isinstance(value, ArrayValue):
            return BMaplets(tuple((BInt(i), self.value_expr(c)) for i, c in enumerate(value.cells)))
        raise TranslationError(f"cannot translate value {value!r}")

    def base_properties(self) -> list[tuple[str, Predicate]]:
        entries = []
        for name in BASE_ORDER:
            if name in self._base_names:
                low, high = BASE_RANGES[name]
                b_name = self._base_names[name]
                entries.append((b_name, PCompare("=", BIdent(b_name), BInterval(BInt(low), BInt(high)))))
        return entries

    def add_variable(self, name: str, typing: Predicate, init: Substitution) -> None:
        self.variables.append((name, typing, init))


def _inline_bodies(op: NodeDecl) -> dict[str, Expr] | None:
    """Output expressions of an operator simple enough to inline into a loop body."""
    if op.locals:
        return None
    inputs = {d.name for d in op.inputs}
    bodies: dict[str, Expr] = {}
    for item in op.body:
        if not isinstance(item, Equation) or len(item.lhs) != 1:
            return None
        if any(isinstance(e, (IfThenElse, CaseOf, HigherOrderApp, Fby)) for e in walk_expr(item.rhs)):
            return None
        if expr_reads(item.rhs) - inputs:
            return None
        bodies[item.lhs[0]] = item.rhs
    return bodies


class NodeTranslator:
    """Translates one node into one operation."""

    def __init__(self, translator: "Translator", node: NodeDecl):
        self.translator = translator
        self.ctx = translator.ctx
        self.source = node
        self.node = simplify_node(node)
        self.fby_vars: dict[int, str] = {}
        self.automata: dict[str, str] = {}
        self._lifted: list[tuple[str, Predicate, Substitution]] | None = None
        self._lift_names: set[str] = set()
        self._params: Mapping[str, BExpr] = {}
        self._register_state()

    def m(self, name: str) -> str:
        return self.ctx.mangle(name)

    # ---- state synthesis ----
    def _register_state(self) -> None:
        fbys = [item.rhs for item in walk_items(self.node.body) if isinstance(item, Equation) and isinstance(item.rhs, Fby)]
        prefix = f"{self.node.name.lower()}_" if self.translator.several_fby_nodes else ""
        for item in walk_items(self.node.body):
            if isinstance(item, Equation) and isinstance(item.rhs, Fby):
                fby = item.rhs
                base = "store" if len(fbys) == 1 else f"store_{fby.instance}"
                self.fby_vars[fby.instance] = self._register_fby(fby, self.ctx.fresh(prefix + base))
            elif isinstance(item, StateMachine):
                self.automata[item.name] = self._register_automaton(item)

    def _register_fby(self, fby: Fby, store: str) -> str:
        ctx = self.ctx
        typing = PMember(BIdent(store), BTotalFunction(BInterval(BInt(0), BInt(fby.depth - 1)), ctx.type_set(fby.ty)))
        init_value = evaluate_constant(fby.init, self.translator.consts)
        cells = tuple((BInt(i), ctx.value_expr(init_value)) for i in range(fby.depth))
        ctx.add_variable(store, typing, Assign(store, BMaplets(cells)))
        logger.debug("%s: fby instance %d -> %s", self.node.name, fby.instance, store)
        return store

    def _register_automaton(self, sm: StateMachine) -> str:
        ctx = self.ctx
        pragma = self.translator.statevars.get(sm.name)
        if pragma is not None:
            var = ctx.claim(pragma)
        else:
            base = sm.name.lower()
            var = ctx.fresh(base if base == "state" or base.endswith("_state") else f"{base}_state")
        set_name = self.m(sm.name)
        ctx.sets.append((set_name, tuple(self.m(s.name) for s in sm.states)))
        ctx.add_variable(var, PMember(BIdent(var), BIdent(set_name)), Assign(var, BIdent(self.m(sm.initial.name))))
        return var

    # ---- operation ----
    def operation(self) -> BOperation:
        node = self.node
        params = tuple(self.m(d.name) for d in node.inputs)
        outputs = tuple(self.m(d.name) for d in node.outputs)
        pre = conjoin([self.ctx.typing(self.m(d.name), d.type) for d in node.inputs]) if node.inputs else None
        body = self.translate_action(node.locals, node.body)
        output_typing = tuple(self.ctx.typing(self.m(d.name), d.type) for d in node.outputs)
        return BOperation(self.m(node.name), outputs, params, pre, body, output_typing)

    def binding(self, operation: BOperation) -> NodeBinding:
        node = self.source
        return NodeBinding(
            node=node.name,
            operation=operation.name,
            inputs=tuple((d.name, self.m(d.name)) for d in node.inputs),
            outputs=tuple((d.name, self.m(d.name)) for d in node.outputs),
            fby=dict(self.fby_vars),
            automata=dict(self.automata),
        )

    def translate_action(self, locals_: Sequence[VarDecl], items: Sequence[BodyItem]) -> Substitution:
        ordered = order_items(items)
        position = {name: pos for pos, item in enumerate(ordered) for name in item_defs(item)}
        pending: dict[int, list[Substitution]] = {}
        subs: list[Substitution] = []
        for pos, item in enumerate(ordered):
            if isinstance(item, Equation) and isinstance(item.rhs, Fby):
                read, shift = self.translate_fby(item)
                subs.append(read)
                # the shift waits for the read and for whatever its input reads
                after = max([pos] + [position[n] for n in expr_reads(item.rhs.input) if n in position])
                pending.setdefault(after, []).append(shift)
            else:
                subs.append(self.translate_item(item))
            subs.extend(pending.pop(pos, []))
        body = seq(subs)
        if locals_:
            names = tuple(self.m(d.name) for d in locals_)
            typing = tuple(self.ctx.typing(self.m(d.name), d.type) for d in locals_)
            body = Var(names, body, typing)
        return body

    def translate_item(self, item: BodyItem) -> Substitution:
        if isinstance(item, Equation):
            if isinstance(item.rhs, HigherOrderApp):
                return self.translate_higher_order(item)
            return self.translate_equation(item)
        if isinstance(item, ActivateIf):
            return self.translate_conditional(item)
        return self.translate_state_machine(item)

    # ---- equations and conditionals ----
    def translate_equation(self, eq: Equation) -> Substitution:
        target = self.m(eq.lhs[0])
        return self._with_lifts(lambda: self._define(target, eq.rhs))

    def translate_conditional(self, item: ActivateIf | CaseOf, target: str | None = None) -> Substitution:
        if isinstance(item, CaseOf):
            if target is None:
                raise TranslationError("a case expression needs a target variable", item.pos)
            return self._with_lifts(lambda: self._define(self.m(target), item))

        def build() -> Substitution:
            cond = self.pred(item.cond)
            then = self.translate_action(item.then_branch.locals, item.then_branch.body)
            else_ = self.translate_action(item.else_branch.locals, item.else_branch.body)
            return If(((cond, then),), None if isinstance(else_, Skip) else else_)

        return self._with_lifts(build)

    def _define(self, target: str, expr: Expr) -> Substitution:
        if isinstance(expr, IfThenElse):
            return If(((self.pred(expr.cond), self._define(target, expr.then)),), self._define(target, expr.else_))
        if isinstance(expr, CaseOf):
            scrutinee = self.expr(expr.scrutinee)
            arms = []
            default = None
            for arm in expr.arms:
                if arm.pattern is None:
                    default = self._define(target, arm.body)
                else:
                    arms.append(((self._label(arm.pattern),), self._define(target, arm.body)))
            return Case(scrutinee, tuple(arms), default)
        return Assign(target, self.expr(expr))

    def _label(self, pattern: Expr) -> BExpr:
        if isinstance(pattern, EnumLit):
            return BIdent(self.m(pattern.name))
        if isinstance(pattern, IntLit):
            return BInt(pattern.value)
        if isinstance(pattern, BoolLit):
            return BBool(pattern.value)
        if isinstance(pattern, Unary) and isinstance(pattern.operand, IntLit):
            return BInt(-pattern.operand.value)
        raise TranslationError("unsupported case pattern", pattern.pos)

    def _collect_lifts(self, build: Callable[[], T]) -> tuple[T, list[tuple[str, Predicate, Substitution]]]:
        saved = self._lifted
        self._lifted = []
        try:
            main = build()
            lifted = self._lifted
        finally:
            self._lifted = saved
        return main, lifted

    def _with_lifts(self, build: Callable[[], Substitution]) -> Substitution:
        main, lifted = self._collect_lifts(build)
        return self._declare_lifts(lifted, main) if lifted else main

    def _declare_lifts(self, lifted: list[tuple[str, Predicate, Substitution]], main: Substitution) -> Substitution:
        return Var(
            tuple(name for name, _, _ in lifted),
            seq([sub for _, _, sub in lifted] + [main]),
            tuple(typing for _, typing, _ in lifted),
        )

    def _without_lifts(self, build: Callable[[], BExpr | Predicate]):
        saved = self._lifted
        self._lifted = None
        try:
            return build()
        finally:
            self._lifted = saved

    def _lift(self, expr: Expr) -> BExpr:
        if self._lifted is None:
            raise TranslationError("a conditional expression cannot appear in this position", expr.pos)
        # temporaries stay distinct across the node so nested VAR blocks never shadow
        name = self.ctx.local("tmp", self._lift_names)
        self._lift_names.add(name)
        definition = self._define(name, expr)
        self._lifted.append((name, self.ctx.typing(name, expr.ty), definition))
        return BIdent(name)

    # ---- expressions ----
    def expr(self, e: Expr) -> BExpr:
        if isinstance(e, IntLit):
            return BInt(e.value)
        if isinstance(e, BoolLit):
            return BBool(e.value)
        if isinstance(e, VarRef):
            if e.name in self._params:
                return self._params[e.name]
            return BIdent(self.m(e.name))
        if isinstance(e, (EnumLit, ConstRef)):
            return BIdent(self.m(e.name))
        if isinstance(e, Unary):
            if e.op == "not":
                return BBoolOf(PNot(self.pred(e.operand)))
            if isinstance(e.operand, IntLit):
                return BInt(-e.operand.value)
            return BNeg(self.expr(e.operand))
        if isinstance(e, Binary):
            if e.op in ARITHMETIC_OPS:
                return BBinOp(ARITHMETIC_OPS[e.op], self.expr(e.left), self.expr(e.right))
            return BBoolOf(self.pred(e))
        if isinstance(e, (IfThenElse, CaseOf)):
            return self._lift(e)
        if isinstance(e, StructMake):
            return BRecord(tuple((self.m(f), self.expr(a)) for (f, _), a in zip(e.ty.fields, e.args)))
        if isinstance(e, FieldAccess):
            return BField(self.expr(e.target), self.m(e.field))
        if isinstance(e, ArrayIndex):
            return BApply(self.expr(e.target), self.expr(e.index))
        raise TranslationError(f"{type(e).__name__} cannot be translated inside an expression", e.pos)

    def pred(self, e: Expr) -> Predicate:
        if isinstance(e, Binary):
            if e.op == "and":
                return conjoin([self.pred(e.left), self.pred(e.right)])
            if e.op == "or":
                parts: list[Predicate] = []
                for side in (self.pred(e.left), self.pred(e.right)):
                    parts.extend(side.parts if isinstance(side, POr) else (side,))
                return POr(tuple(parts))
            if e.op in COMPARE_OPS:
                return PCompare(COMPARE_OPS[e.op], self.expr(e.left), self.expr(e.right))
        if isinstance(e, Unary) and e.op == "not":
            return PNot(self.pred(e.operand))
        return PCompare("=", self.expr(e), BBool(True))

    # ---- fby ----
    def translate_fby(self, eq: Equation) -> tuple[Substitution, Substitution]:
        """The buffer read and the end-of-cycle shift, scheduled separately."""
        fby = eq.rhs
        store = self.fby_vars[fby.instance]
        read = Assign(self.m(eq.lhs[0]), BApply(BIdent(store), BInt(0)))
        def shift() -> Substitution:
            # a conditional input is computed into a temporary before the cells move
            steps: list[Substitution] = [
                FunctionOverride(store, BInt(i), BApply(BIdent(store), BInt(i + 1))) for i in range(fby.depth - 1)
            ]
            steps.append(FunctionOverride(store, BInt(fby.depth - 1), self.expr(fby.input)))
            return seq(steps)

        return read, self._with_lifts(shift)

    # ---- automata ----
    def translate_state_machine(self, sm: StateMachine) -> Substitution:
        var = self.automata[sm.name]
        arms = [((BIdent(self.m(state.name)),), self._state_arm(sm, var, state)) for state in sm.states]
        return Case(BIdent(var), tuple(arms))

    def _state_arm(self, sm: StateMachine, var: str, state: StateDecl) -> Substitution:
        body = self._state_body(state)
        if not state.transitions:
            return body
        guards = []
        for tr in state.transitions:
            target = sm.state(tr.target)
            cond, lifted = self._collect_lifts(lambda: self.pred(tr.cond))
            guards.append((lifted, cond, seq([Assign(var, BIdent(self.m(target.name))), self._state_body(target)])))
        # a guard's temporaries are computed only once the guards before it have failed
        arm: Substitution | None = None if isinstance(body, Skip) else body
        branches: list[tuple[Predicate, Substitution]] = []
        for lifted, cond, fire in reversed(guards):
            branches.insert(0, (cond, fire))
            if lifted:
                arm = self._declare_lifts(lifted, If(tuple(branches), arm))
                branches = []
        return If(tuple(branches), arm) if branches else arm

    def _state_body(self, state: StateDecl) -> Substitution:
        return self.translate_action(state.locals, state.body)

    # ---- iterators ----
    def translate_higher_order(self, eq: Equation) -> Substitution:
        app = eq.rhs
        op = self.translator.program.node(app.op)
        out_count = map_output_count(app, op)
        layout = hof_layout(app, tuple(self.m(n) for n in eq.lhs), out_count)
        return self._with_lifts(lambda: self._loop(app, op, layout))

    def _loop(self, app: HigherOrderApp, op: NodeDecl, layout: HofLayout) -> Substitution:
        ctx = self.ctx
        avoid: set[str] = set()

        def local(base: str) -> str:
            name = ctx.local(base, avoid)
            avoid.add(name)
            return name

        size = ctx.size_expr(app.size, app.length)
        last = ctx.last_index(app.size, app.length)
        first = 1 if app.indexed else 0
        cond_out = 1 if app.conditional else 0
        acc_types = [d.type for d in op.outputs[cond_out:cond_out + app.acc_count]]
        v_types = [d.type for d in op.outputs[cond_out + app.acc_count:]]

        declared: list[tuple[str, Predicate]] = []
        if layout.idx is not None:
            idx = layout.idx
        else:
            idx = local("idx")
            declared.append((idx, PMember(BIdent(idx), BInterval(BInt(0), size))))
        accs = [local("acc" if app.acc_count == 1 else f"acc_{k + 1}") for k in range(app.acc_count)]
        declared.extend((a, ctx.typing(a, ty)) for a, ty in zip(accs, acc_types))
        cond = local("cond") if app.conditional else None
        if cond is not None:
            declared.append((cond, PMember(BIdent(cond), BIdent("BOOL"))))

        # cells the loop never reaches keep their default
        fills = [self.expr(d) for d in app.defaults] if app.conditional else [
            ctx.value_expr(zero_value(ty)) for ty in v_types
        ]
        prefill = [Assign(name, BConstFunction(BInterval(BInt(0), last), fill)) for name, fill in zip(layout.outputs, fills)]

        start: list[Substitution] = [Assign(idx, BInt(0))]
        start.extend(Assign(a, self.expr(e)) for a, e in zip(accs, app.acc_inits))
        if cond is not None:
            start.append(Assign(cond, self.expr(app.init_cond)))

        arrays = [self.expr(a) for a in app.array_args]
        args = ([BIdent(idx)] if app.indexed else []) + [BIdent(a) for a in accs] + [BApply(a, BIdent(idx)) for a in arrays]
        scalar_targets = ([cond] if cond is not None else []) + accs

        quantified = local("i")
        specs: list[BExpr | None] = [None] * len(layout.outputs)
        bodies = _inline_bodies(simplify_node(op))
        if bodies is not None:
            env = {d.name: arg for d, arg in zip(op.inputs, args)}
            values = [self._with_params(env, bodies[d.name]) for d in op.outputs]
            writes: list[Substitution] = [Assign(t, v) for t, v in zip(scalar_targets, values)]
            writes.extend(
                FunctionOverride(name, BIdent(idx), v)
                for name, v in zip(layout.outputs, values[len(scalar_targets):])
            )
            step = writes[0] if len(writes) == 1 else Parallel(tuple(writes))
            acc_params = {d.name for d in op.inputs[first:first + app.acc_count]}
            spec_env = {d.name: BIdent(quantified) for d in op.inputs[:first]}
            spec_env.update(
                (d.name, BApply(a, BIdent(quantified))) for d, a in zip(op.inputs[first + app.acc_count:], arrays)
            )
            for j, d in enumerate(op.outputs[cond_out + app.acc_count:]):
                if not expr_reads(bodies[d.name]) & acc_params:
                    specs[j] = self._with_params(spec_env, bodies[d.name])
        else:
            outputs = [BIdent(t) for t in scalar_targets] + [BApply(BIdent(n), BIdent(idx)) for n in layout.outputs]
            step = OpCall(tuple(outputs), self.translator.helper_operation(op), tuple(args))

        guard: Predicate = PCompare("<", BIdent(idx), size)
        if cond is not None:
            guard = conjoin([guard, PCompare("=", BIdent(cond), BBool(True))])

        parts: list[Predicate] = [PMember(BIdent(idx), BInterval(BInt(0), size))]
        parts.extend(ctx.typing(a, ty) for a, ty in zip(accs, acc_types))
        done: Predicate = PMember(BIdent(quantified), BInterval(BInt(0), BBinOp("-", BIdent(idx), BInt(1))))
        if cond is not None:
            done = conjoin([done, PCompare("=", BIdent(cond), BBool(True))])
        for j, name in enumerate(layout.outputs):
            cell = BApply(BIdent(name), BIdent(quantified))
            spec = PCompare("=", cell, specs[j]) if specs[j] is not None else PMember(cell, ctx.type_set(v_types[j]))
            parts.append(PForAll(quantified, PImplies(done, spec)))
            if app.conditional:
                rest = PMember(BIdent(quantified), BInterval(BIdent(idx), last))
                parts.append(PForAll(quantified, PImplies(rest, PCompare("=", cell, fills[j]))))

        loop = While(
            guard,
            seq([step, Assign(idx, BBinOp("+", BIdent(idx), BInt(1)))]),
            conjoin(parts),
            BBinOp("-", size, BIdent(idx)),
        )
        finish: list[Substitution] = []
        if layout.cond is not None:
            finish.append(Assign(layout.cond, BIdent(cond)))
        finish.extend(Assign(name, BIdent(a)) for name, a in zip(layout.accs, accs))

        inner = seq([*start, loop, *finish])
        if declared:
            inner = Var(tuple(n for n, _ in declared), inner, tuple(t for _, t in declared))
        return seq([*prefill, inner])

    def _with_params(self, env: Mapping[str, BExpr], expr: Expr) -> BExpr:
        saved = self._params
        self._params = env
        try:
            return self._without_lifts(lambda: self.expr(expr))
        finally:
            self._params = saved


class Translator:
    def __init__(self, program: TypedProgram, machine_name: str | None = None):
        self.program = program
        self.ctx = TranslationContext(program)
        self.consts = const_values(program)
        self.statevars = self._statevar_pragmas()
        nodes = [n for n in program.nodes if n.kind == "node"]
        self.operation_nodes: list[NodeDecl] = nodes or list(program.nodes)
        fby_nodes = [
            n for n in self.operation_nodes
            if any(isinstance(i, Equation) and isinstance(i.rhs, Fby) for i in walk_items(n.body))
        ]
        self.several_fby_nodes = len(fby_nodes) > 1
        self.machine_name = machine_name or self._machine_pragma() or (
            self.ctx.mangle(self.operation_nodes[-1].name) if self.operation_nodes else "Machine"
        )
        self.operations: list[BOperation] = []
        self.helpers: dict[str, BOperation] = {}
        self.bindings: dict[str, NodeBinding] = {}

    def _machine_pragma(self) -> str | None:
        pragmas = self.program.pragma_values("machine")
        return pragmas[-1].text if pragmas else None

    def _statevar_pragmas(self) -> dict[str, str]:
        mapping: dict[str, str] = {}
        for pragma in self.program.pragma_values("statevar"):
            parts = pragma.text.split()
            if len(parts) != 2:
                raise TranslationError("expected '--@statevar AUTOMATON NAME'", pragma.pos)
            mapping[parts[0]] = parts[1]
        return mapping

    def translate_types_and_constants(self) -> TranslationContext:
        ctx = self.ctx
        for decl in self.program.type_decls:
            if isinstance(decl.type, EnumType):
                ctx.sets.append((ctx.mangle(decl.name), tuple(ctx.mangle(m) for m in decl.type.members)))
        for decl in self.program.const_decls:
            name = ctx.mangle(decl.name)
            ctx.constants.append((name, PCompare("=", BIdent(name), ctx.value_expr(self.consts[decl.name]))))
        for decl in self.program.type_decls:
            if isinstance(decl.type, StructType):
                name = ctx.mangle(decl.name)
                fields = tuple((ctx.mangle(f), ctx.type_set(t)) for f, t in decl.type.fields)
                ctx.structs.append((name, PCompare("=", BIdent(name), BStructSet(fields))))
        return ctx

    def translate_node(self, node: NodeDecl) -> BOperation:
        translator = NodeTranslator(self, node)
        operation = translator.operation()
        self.bindings[node.name] = translator.binding(operation)
        return operation

    def helper_operation(self, op: NodeDecl) -> str:
        """Name of the operation an iterator loop calls for a non-inlinable operator."""
        if any(n.name == op.name for n in self.operation_nodes):
            return self.ctx.mangle(op.name)
        if op.name not in self.helpers:
            logger.info("operator %s is called from a loop body", op.name)
            self.helpers[op.name] = NodeTranslator(self, op).operation()
        return self.helpers[op.name].name

    def invariant_pragmas(self) -> list[Predicate]:
        return [parse_predicate(p.text) for p in self.program.pragma_values("invariant")]

    def machine(self) -> BMachine:
        ctx = self.ctx
        declared = [*ctx.base_properties(), *ctx.constants, *ctx.structs]
        inits = [init for _, _, init in ctx.variables]
        initialisation = None
        if inits:
            initialisation = inits[0] if len(inits) == 1 else Parallel(tuple(inits))
        return BMachine(
            name=self.machine_name,
            sets=tuple(ctx.sets),
            constants=tuple(name for name, _ in declared),
            properties=tuple(prop for _, prop in declared),
            variables=tuple(name for name, _, _ in ctx.variables),
            invariant=tuple([typing for _, typing, _ in ctx.variables] + self.invariant_pragmas()),
            initialisation=initialisation,
            operations=tuple(self.operations + list(self.helpers.values())),
        )

    def translate(self) -> TranslationResult:
        self.translate_types_and_constants()
        for node in self.operation_nodes:
            self.operations.append(self.translate_node(node))
        machine = self.machine()
        logger.info(
            "translated %d node(s) into machine %s (%d variable(s))",
            len(self.operation_nodes), machine.name, len(machine.variables),
        )
        return TranslationResult(machine, dict(self.bindings), dict(self.ctx.names))


def translate(program: TypedProgram, machine_name: str | None = None) -> TranslationResult:
    return Translator(program, machine_name).translate()
