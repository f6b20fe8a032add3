from __future__ import annotations

import logging

from scade2b.core.errors import ScadeNameError, ScadeSyntaxError
from scade2b.models.scade_ast import (
    BASE_TYPE_NAMES,
    HOF_VARIANTS,
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
    Pragma,
    ScadeProgram,
    StateDecl,
    StateMachine,
    StructMake,
    StructType,
    Transition,
    TypeDecl,
    TypeExpr,
    Unary,
    VarDecl,
    VarRef,
)
from scade2b.services.scade_lexer import Token, TokenKind, tokenize

logger = logging.getLogger(__name__)

PRAGMA_KINDS = ("machine", "invariant", "statevar")
COMPARISONS = ("=", "<>", "<", "<=", ">", ">=")

_UNSUPPORTED = {
    "pre": "'pre' is not supported; use fby",
    "->": "'->' is not supported; use fby",
    "until": "weak transitions ('until') are not supported",
    "resume": "'resume' transitions are not supported",
    "synchro": "'synchro' transitions are not supported",
    "when": "clocks and 'activate when' are not supported",
}


class ScadeParser:
    def __init__(self, source: str, filename: str | None = None):
        self.filename = filename
        tokens = tokenize(source, filename)
        self.pragmas = [self._pragma(t) for t in tokens if t.kind is TokenKind.PRAGMA]
        self.tokens = [t for t in tokens if t.kind is not TokenKind.PRAGMA]
        self.index = 0
        self._fby_count = 0
        self._automaton_count = 0

    # ---- token helpers ----
    @property
    def tok(self) -> Token:
        return self.tokens[self.index]

    def peek(self, n: int = 1) -> Token:
        return self.tokens[min(self.index + n, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.tok
        if token.kind is not TokenKind.EOF:
            self.index += 1
        return token

    def at(self, *texts: str) -> bool:
        return self.tok.kind in (TokenKind.KEYWORD, TokenKind.SYMBOL) and self.tok.text in texts

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        self._reject_unsupported()
        raise self.error(f"unexpected {self.tok.describe()}", {f"'{text}'"})

    def expect_ident(self) -> Token:
        if self.tok.kind is TokenKind.IDENT:
            return self.advance()
        self._reject_unsupported()
        raise self.error(f"unexpected {self.tok.describe()}", {"identifier"})

    def expect_int(self) -> int:
        if self.tok.kind is TokenKind.INT:
            return int(self.advance().text)
        raise self.error(f"unexpected {self.tok.describe()}", {"integer"})

    def error(self, message: str, expected=()) -> ScadeSyntaxError:
        return ScadeSyntaxError(message, self.tok.pos, self.filename, expected)

    def _reject_unsupported(self) -> None:
        if self.tok.text in _UNSUPPORTED and self.tok.kind is not TokenKind.IDENT:
            raise ScadeSyntaxError(_UNSUPPORTED[self.tok.text], self.tok.pos, self.filename)

    def _pragma(self, token: Token) -> Pragma:
        kind, _, rest = token.text.partition(" ")
        if kind not in PRAGMA_KINDS:
            raise ScadeSyntaxError(f"unknown pragma '--@{kind}'", token.pos, self.filename, PRAGMA_KINDS)
        return Pragma(kind, rest.strip(), pos=token.pos)

    # ---- declarations ----
    def parse_program(self) -> ScadeProgram:
        type_decls: list[TypeDecl] = []
        const_decls: list[ConstDecl] = []
        nodes: list[NodeDecl] = []
        while self.tok.kind is not TokenKind.EOF:
            if self.accept("type"):
                type_decls.append(self.type_decl())
                while self.tok.kind is TokenKind.IDENT:
                    type_decls.append(self.type_decl())
            elif self.accept("const"):
                const_decls.append(self.const_decl())
                while self.tok.kind is TokenKind.IDENT:
                    const_decls.append(self.const_decl())
            elif self.at("node", "function"):
                nodes.append(self.node_decl())
            else:
                raise self.error(f"unexpected {self.tok.describe()}", {"'type'", "'const'", "'node'", "'function'"})
        program = ScadeProgram(tuple(type_decls), tuple(const_decls), tuple(nodes), tuple(self.pragmas))
        _check_duplicates(program, self.filename)
        return program

    def type_decl(self) -> TypeDecl:
        name = self.expect_ident()
        self.expect("=")
        if self.accept("enum"):
            self.expect("{")
            members = [self.expect_ident().text]
            while self.accept(","):
                members.append(self.expect_ident().text)
            self.expect("}")
            ty: TypeExpr = EnumType(name.text, tuple(members))
        elif self.accept("{"):
            fields = [self.struct_field()]
            while self.accept(","):
                fields.append(self.struct_field())
            self.expect("}")
            ty = StructType(name.text, tuple(fields))
        else:
            ty = self.type_expr()
        self.expect(";")
        return TypeDecl(name.text, ty, pos=name.pos)

    def struct_field(self) -> tuple[str, TypeExpr]:
        name = self.expect_ident().text
        self.expect(":")
        return name, self.type_expr()

    def type_expr(self) -> TypeExpr:
        if self.accept("("):
            ty = self.type_expr()
            self.expect(")")
        else:
            name = self.expect_ident().text
            ty = BaseType(name) if name in BASE_TYPE_NAMES else NamedType(name)
        while self.accept("^"):
            if self.tok.kind is TokenKind.INT:
                ty = ArrayType(ty, int(self.advance().text))
            else:
                ty = ArrayType(ty, self.expect_ident().text)
        return ty

    def const_decl(self) -> ConstDecl:
        name = self.expect_ident()
        self.expect(":")
        ty = self.type_expr()
        self.expect("=")
        value = self.expr()
        self.expect(";")
        return ConstDecl(name.text, ty, value, pos=name.pos)

    def node_decl(self) -> NodeDecl:
        kind = self.advance().text
        name = self.expect_ident()
        self._fby_count = 0
        self.expect("(")
        inputs = self.params(")")
        self.expect(")")
        self.expect("returns")
        self.expect("(")
        outputs = self.params(")")
        self.expect(")")
        if self.accept(";"):
            return NodeDecl(kind, name.text, inputs, outputs, (), (), pos=name.pos)
        locals_ = self.var_block()
        self.expect("let")
        body = self.items()
        self.expect("tel")
        self.accept(";")
        return NodeDecl(kind, name.text, inputs, outputs, locals_, body, pos=name.pos)

    def params(self, closer: str) -> tuple[VarDecl, ...]:
        decls: list[VarDecl] = []
        while not self.at(closer):
            decls.extend(self.var_group())
            if not self.accept(";"):
                break
        return tuple(decls)

    def var_group(self) -> list[VarDecl]:
        names = [self.expect_ident()]
        while self.accept(","):
            names.append(self.expect_ident())
        self.expect(":")
        ty = self.type_expr()
        return [VarDecl(n.text, ty, pos=n.pos) for n in names]

    def var_block(self) -> tuple[VarDecl, ...]:
        if not self.accept("var"):
            return ()
        decls = self.var_group()
        self.expect(";")
        while self.tok.kind is TokenKind.IDENT:
            decls.extend(self.var_group())
            self.expect(";")
        return tuple(decls)

    # ---- body items ----
    def items(self) -> tuple[BodyItem, ...]:
        items: list[BodyItem] = []
        while not self.at("tel"):
            items.append(self.item())
        return tuple(items)

    def item(self) -> BodyItem:
        if self.at("activate"):
            start = self.advance()
            block = self.activate_body(start)
            self.expect("returns")
            self.returns_list()
            self.expect(";")
            return block
        if self.at("automaton"):
            return self.automaton()
        if self.tok.kind is TokenKind.IDENT:
            return self.equation()
        self._reject_unsupported()
        raise self.error(f"unexpected {self.tok.describe()}", {"identifier", "'activate'", "'automaton'", "'tel'"})

    def equation(self) -> Equation:
        first = self.expect_ident()
        lhs = [first.text]
        while self.accept(","):
            lhs.append(self.expect_ident().text)
        self.expect("=")
        rhs = self.expr()
        self.expect(";")
        return Equation(tuple(lhs), rhs, pos=first.pos)

    def returns_list(self) -> None:
        if self.accept(".."):
            return
        self.expect_ident()
        while self.accept(","):
            self.expect_ident()

    def activate_body(self, start: Token) -> ActivateIf:
        name = self.advance().text if self.tok.kind is TokenKind.IDENT else None
        self.expect("if")
        cond = self.expr()
        self.expect("then")
        then_branch = self.branch()
        if self.at("elsif"):
            nested_start = self.advance()
            nested = self._elsif_chain(nested_start)
            else_branch = Action((), (nested,), pos=nested_start.pos)
        else:
            self.expect("else")
            else_branch = self.branch()
        return ActivateIf(cond, then_branch, else_branch, name, pos=start.pos)

    def _elsif_chain(self, start: Token) -> ActivateIf:
        cond = self.expr()
        self.expect("then")
        then_branch = self.branch()
        if self.at("elsif"):
            nested_start = self.advance()
            else_branch = Action((), (self._elsif_chain(nested_start),), pos=nested_start.pos)
        else:
            self.expect("else")
            else_branch = self.branch()
        return ActivateIf(cond, then_branch, else_branch, None, pos=start.pos)

    def branch(self) -> Action:
        start = self.tok
        if self.at("activate"):
            self.advance()
            return Action((), (self.activate_body(start),), pos=start.pos)
        locals_ = self.var_block()
        self.expect("let")
        body = self.items()
        self.expect("tel")
        return Action(locals_, body, pos=start.pos)

    def automaton(self) -> StateMachine:
        start = self.expect("automaton")
        if self.tok.kind is TokenKind.IDENT:
            name = self.advance().text
        else:
            self._automaton_count += 1
            name = "SM" if self._automaton_count == 1 else f"SM{self._automaton_count}"
        states = [self.state()]
        while self.at("initial", "state"):
            states.append(self.state())
        self.expect("returns")
        self.returns_list()
        self.expect(";")
        return StateMachine(name, tuple(states), pos=start.pos)

    def state(self) -> StateDecl:
        start = self.tok
        is_initial = self.accept("initial")
        self.expect("state")
        name = self.expect_ident().text
        transitions: list[Transition] = []
        if self.accept("unless"):
            transitions.append(self.transition())
            while self.at("if"):
                transitions.append(self.transition())
        self._reject_unsupported()
        locals_: tuple[VarDecl, ...] = ()
        body: tuple[BodyItem, ...] = ()
        if self.at("var", "let"):
            locals_ = self.var_block()
            self.expect("let")
            body = self.items()
            self.expect("tel")
        return StateDecl(name, is_initial, tuple(transitions), locals_, body, pos=start.pos)

    def transition(self) -> Transition:
        start = self.expect("if")
        cond = self.expr()
        self._reject_unsupported()
        self.expect("restart")
        target = self.expect_ident().text
        self.expect(";")
        return Transition(cond, target, pos=start.pos)

    # ---- expressions ----
    def expr(self) -> Expr:
        start = self.tok
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return IfThenElse(cond, then, self.expr(), pos=start.pos)
        if self.accept("case"):
            scrutinee = self.expr()
            self.expect("of")
            arms = [self.case_arm()]
            while self.at("|"):
                arms.append(self.case_arm())
            return CaseOf(scrutinee, tuple(arms), pos=start.pos)
        return self.or_expr()

    def case_arm(self) -> CaseArm:
        start = self.expect("|")
        pattern: Expr | None
        if self.tok.kind is TokenKind.IDENT and self.tok.text == "_":
            self.advance()
            pattern = None
        elif self.tok.kind is TokenKind.INT:
            pattern = IntLit(int(self.advance().text), pos=start.pos)
        elif self.at("-"):
            self.advance()
            pattern = Unary("-", IntLit(self.expect_int()), pos=start.pos)
        elif self.at("true", "false"):
            pattern = BoolLit(self.advance().text == "true", pos=start.pos)
        else:
            token = self.expect_ident()
            pattern = VarRef(token.text, pos=token.pos)
        self.expect(":")
        return CaseArm(pattern, self.expr(), pos=start.pos)

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at("or"):
            op = self.advance()
            left = Binary("or", left, self.and_expr(), pos=op.pos)
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at("and"):
            op = self.advance()
            left = Binary("and", left, self.not_expr(), pos=op.pos)
        return left

    def not_expr(self) -> Expr:
        if self.at("not"):
            op = self.advance()
            return Unary("not", self.not_expr(), pos=op.pos)
        return self.cmp_expr()

    def cmp_expr(self) -> Expr:
        left = self.add_expr()
        if self.at(*COMPARISONS):
            op = self.advance()
            left = Binary(op.text, left, self.add_expr(), pos=op.pos)
        return left

    def add_expr(self) -> Expr:
        left = self.mul_expr()
        while self.at("+", "-"):
            op = self.advance()
            left = Binary(op.text, left, self.mul_expr(), pos=op.pos)
        return left

    def mul_expr(self) -> Expr:
        left = self.unary()
        while self.at("*", "/", "mod"):
            op = self.advance()
            left = Binary(op.text, left, self.unary(), pos=op.pos)
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            op = self.advance()
            return Unary("-", self.unary(), pos=op.pos)
        return self.postfix()

    def postfix(self) -> Expr:
        expr = self.primary()
        while True:
            if self.at("["):
                start = self.advance()
                index = self.expr()
                self.expect("]")
                expr = ArrayIndex(expr, index, pos=start.pos)
            elif self.at("."):
                start = self.advance()
                expr = FieldAccess(expr, self.expect_ident().text, pos=start.pos)
            else:
                return expr

    def primary(self) -> Expr:
        start = self.tok
        if start.kind is TokenKind.INT:
            self.advance()
            return IntLit(int(start.text), pos=start.pos)
        if self.at("true", "false"):
            self.advance()
            return BoolLit(start.text == "true", pos=start.pos)
        if start.kind is TokenKind.IDENT:
            self.advance()
            return VarRef(start.text, pos=start.pos)
        if self.accept("fby"):
            self.expect("(")
            input_ = self.expr()
            self.expect(";")
            depth = self.expect_int()
            self.expect(";")
            init = self.expr()
            self.expect(")")
            fby = Fby(input_, depth, init, self._fby_count, pos=start.pos)
            self._fby_count += 1
            return fby
        if self.accept("("):
            if self.accept("make"):
                type_name = self.expect_ident().text
                self.expect(")")
                return StructMake(type_name, self.call_args(), pos=start.pos)
            if self.at(*HOF_VARIANTS):
                return self.higher_order(start)
            inner = self.expr()
            self.expect(")")
            return inner
        self._reject_unsupported()
        raise self.error(
            f"unexpected {start.describe()}",
            {"integer", "identifier", "'true'", "'false'", "'('", "'fby'", "'-'", "'not'", "'if'", "'case'"},
        )

    def call_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.expr())
            while self.accept(","):
                args.append(self.expr())
        self.expect(")")
        return tuple(args)

    def higher_order(self, start: Token) -> HigherOrderApp:
        variant = self.advance().text
        acc_count = 0
        if variant.startswith("mapfold"):
            acc_count = self.expect_int() if self.tok.kind is TokenKind.INT else 1
        elif variant.startswith("fold"):
            acc_count = 1
        op = self.expect_ident().text
        self.expect("<<")
        size: int | str = self.expect_int() if self.tok.kind is TokenKind.INT else self.expect_ident().text
        self.expect(">>")
        init_cond = None
        defaults: tuple[Expr, ...] = ()
        conditional = variant.rstrip("i").endswith("w")
        if conditional:
            self.expect("if")
            init_cond = self.expr()
            if not variant.startswith("fold"):
                self.expect("default")
                defaults = self.defaults()
        self.expect(")")
        args = self.call_args()
        if len(args) < acc_count:
            raise ScadeSyntaxError(
                f"{variant} expects {acc_count} accumulator argument(s)", start.pos, self.filename
            )
        return HigherOrderApp(
            variant, op, size, acc_count, init_cond, defaults,
            args[:acc_count], args[acc_count:], pos=start.pos,
        )

    def defaults(self) -> tuple[Expr, ...]:
        if not self.at("("):
            return (self.expr(),)
        self.advance()
        values = [self.expr()]
        while self.accept(","):
            values.append(self.expr())
        self.expect(")")
        return tuple(values)


def _check_duplicates(program: ScadeProgram, filename: str | None) -> None:
    seen: dict[str, str] = {}

    def claim(name: str, what: str, pos) -> None:
        if name in seen:
            raise ScadeNameError(f"duplicate declaration of {what} '{name}' (already a {seen[name]})", pos, filename)
        seen[name] = what

    for decl in program.type_decls:
        claim(decl.name, "type", decl.pos)
    members: dict[str, str] = {}
    for decl in program.type_decls:
        if isinstance(decl.type, EnumType):
            for member in decl.type.members:
                if member in members:
                    raise ScadeNameError(
                        f"duplicate enum member '{member}' (already in {members[member]})", decl.pos, filename
                    )
                members[member] = decl.name
                claim(member, "enum member", decl.pos)
    for decl in program.const_decls:
        claim(decl.name, "constant", decl.pos)
    for node in program.nodes:
        claim(node.name, node.kind, node.pos)


def parse_program(source_text: str, filename: str | None = None) -> ScadeProgram:
    program = ScadeParser(source_text, filename).parse_program()
    logger.debug("parsed %d node(s) from %s", len(program.nodes), filename or "<input>")
    return program
