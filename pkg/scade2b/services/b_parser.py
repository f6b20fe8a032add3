"""Tokenizer and predicate/expression parser for the B notation the emitter writes.

Only what the tool itself produces is understood: it reads invariant pragmas
and gives golden-file tests a whitespace-insensitive token stream. Unicode
glyphs are folded onto their ASCII spellings.
"""
from __future__ import annotations

import re

from scade2b.core.errors import BSyntaxError
from scade2b.models.b_ast import (
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
    BMaplets,
    BNeg,
    BRecord,
    BStructSet,
    BTotalFunction,
    PAnd,
    PCompare,
    PForAll,
    PImplies,
    PMember,
    PNot,
    POr,
    Predicate,
)

UNICODE_TO_ASCII = {
    "∧": "&",
    "∨": "or",
    "⇒": "=>",
    "∈": ":",
    "≠": "/=",
    "≤": "<=",
    "≥": ">=",
    "→": "-->",
    "↦": "|->",
    "∀": "!",
    "←": "<--",
    "¬": "not",
}

_TOKEN = re.compile(
    r"""
    (?P<SKIP>\s+|/\*.*?\*/|//[^\n]*)
  | (?P<INT>\d+)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<SYMBOL><--|-->|\|->|:=|<=|>=|/=|=>|\|\||\.\.|[!.(){},;:=<>+\-*/&'|\[\]])
  | (?P<UNICODE>[∧∨⇒∈≠≤≥→↦∀←¬])
  | (?P<MISMATCH>.)
    """,
    re.VERBOSE | re.DOTALL,
)

COMPARISONS = ("=", "/=", "<", "<=", ">", ">=")


def tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for match in _TOKEN.finditer(text):
        kind = match.lastgroup
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise BSyntaxError(f"unexpected character {match.group()!r} in B text")
        value = match.group()
        tokens.append(UNICODE_TO_ASCII.get(value, value) if kind == "UNICODE" else value)
    return tokens


class BParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def tok(self) -> str | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def peek(self, n: int = 1) -> str | None:
        position = self.index + n
        return self.tokens[position] if position < len(self.tokens) else None

    def advance(self) -> str:
        token = self.tok
        if token is None:
            raise self.error("unexpected end of B text")
        self.index += 1
        return token

    def accept(self, token: str) -> bool:
        if self.tok == token:
            self.index += 1
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.accept(token):
            raise self.error(f"expected '{token}', found {self.tok or 'end of text'!r}")

    def ident(self) -> str:
        token = self.advance()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            raise self.error(f"expected an identifier, found '{token}'")
        return token

    def error(self, message: str) -> BSyntaxError:
        return BSyntaxError(f"{message} in '{self.text.strip()}'")

    def done(self) -> None:
        if self.tok is not None:
            raise self.error(f"unexpected '{self.tok}'")

    # ---- predicates ----
    def predicate(self) -> Predicate:
        left = self.disjunction()
        if self.accept("=>"):
            return PImplies(left, self.predicate())
        return left

    def disjunction(self) -> Predicate:
        parts = [self.conjunction()]
        while self.accept("or"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else POr(tuple(parts))

    def conjunction(self) -> Predicate:
        parts = [self.unary_predicate()]
        while self.accept("&"):
            parts.append(self.unary_predicate())
        return parts[0] if len(parts) == 1 else PAnd(tuple(parts))

    def unary_predicate(self) -> Predicate:
        if self.accept("not"):
            self.expect("(")
            inner = self.predicate()
            self.expect(")")
            return PNot(inner)
        if self.accept("!"):
            var = self.ident()
            self.expect(".")
            self.expect("(")
            body = self.predicate()
            self.expect(")")
            return PForAll(var, body)
        if self.tok == "(":
            saved = self.index
            self.advance()
            try:
                inner = self.predicate()
                self.expect(")")
            except BSyntaxError:
                inner = None
            if inner is not None and self.tok not in COMPARISONS + (":", "+", "-", "*", "/", "mod", "..", "("):
                return inner
            self.index = saved
        return self.atomic_predicate()

    def atomic_predicate(self) -> Predicate:
        left = self.expression()
        if self.accept(":"):
            return PMember(left, self.set_expression())
        token = self.tok
        if token in COMPARISONS:
            self.advance()
            return PCompare(token, left, self.expression())
        raise self.error(f"expected a comparison or membership, found {token or 'end of text'!r}")

    def set_expression(self) -> BExpr:
        domain = self.expression()
        if self.accept(".."):
            domain = BInterval(domain, self.expression())
        if self.accept("-->"):
            return BTotalFunction(domain, self.set_expression())
        return domain

    # ---- expressions ----
    def expression(self) -> BExpr:
        left = self.term()
        while self.tok in ("+", "-"):
            op = self.advance()
            left = BBinOp(op, left, self.term())
        return left

    def term(self) -> BExpr:
        left = self.factor()
        while self.tok in ("*", "/", "mod"):
            op = self.advance()
            if op == "*" and self.tok == "{" and isinstance(left, BInterval):
                self.advance()
                value = self.expression()
                self.expect("}")
                left = BConstFunction(left, value)
                continue
            left = BBinOp(op, left, self.factor())
        return left

    def factor(self) -> BExpr:
        if self.accept("-"):
            operand = self.factor()
            if isinstance(operand, BInt):
                return BInt(-operand.value)
            return BNeg(operand)
        return self.postfix()

    def postfix(self) -> BExpr:
        expr = self.primary()
        while True:
            if self.tok == "(" and isinstance(expr, (BIdent, BApply, BField)):
                self.advance()
                arg = self.expression()
                self.expect(")")
                expr = BApply(expr, arg)
            elif self.accept("'"):
                expr = BField(expr, self.ident())
            else:
                return expr

    def primary(self) -> BExpr:
        token = self.tok
        if token is None:
            raise self.error("unexpected end of B text")
        if token.isdigit():
            self.advance()
            return BInt(int(token))
        if token in ("TRUE", "FALSE"):
            self.advance()
            return BBool(token == "TRUE")
        if token == "bool" and self.peek() == "(":
            self.advance()
            self.advance()
            pred = self.predicate()
            self.expect(")")
            return BBoolOf(pred)
        if token == "rec" and self.peek() == "(":
            self.advance()
            self.advance()
            return BRecord(self.labelled_list())
        if token == "struct" and self.peek() == "(":
            self.advance()
            self.advance()
            return BStructSet(self.labelled_list(sets=True))
        if token == "{":
            self.advance()
            pairs = []
            if not self.accept("}"):
                while True:
                    key = self.expression()
                    self.expect("|->")
                    pairs.append((key, self.expression()))
                    if self.accept("}"):
                        break
                    self.expect(",")
            return BMaplets(tuple(pairs))
        if token == "(":
            self.advance()
            inner = self.expression()
            if self.accept(".."):
                inner = BInterval(inner, self.expression())
            self.expect(")")
            return inner
        name = self.ident()
        return BIdent(name)

    def labelled_list(self, sets: bool = False) -> tuple[tuple[str, BExpr], ...]:
        fields = []
        while True:
            name = self.ident()
            self.expect(":")
            fields.append((name, self.set_expression() if sets else self.expression()))
            if self.accept(")"):
                return tuple(fields)
            self.expect(",")


def parse_predicate(text: str) -> Predicate:
    parser = BParser(text)
    pred = parser.predicate()
    parser.done()
    return pred


def parse_expression(text: str) -> BExpr:
    parser = BParser(text)
    expr = parser.set_expression()
    parser.done()
    return expr
