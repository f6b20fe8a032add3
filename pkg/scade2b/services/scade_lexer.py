from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from scade2b.core.errors import ScadeSyntaxError
from scade2b.models.scade_ast import SourcePos


class TokenKind(str, Enum):
    IDENT = "identifier"
    INT = "integer"
    KEYWORD = "keyword"
    SYMBOL = "symbol"
    PRAGMA = "pragma"
    EOF = "end of file"


KEYWORDS = frozenset({
    "activate", "and", "automaton", "case", "const", "default", "else", "elsif",
    "enum", "false", "fby", "function", "if", "initial", "let", "make", "mod",
    "node", "not", "of", "or", "restart", "returns", "state", "tel", "then",
    "true", "type", "unless", "var",
    "map", "mapi", "mapw", "mapwi", "fold", "foldi", "foldw", "foldwi",
    "mapfold", "mapfoldi", "mapfoldw", "mapfoldwi",
    # recognised so that the parser can reject them by name
    "pre", "until", "resume", "synchro", "when",
})

_TOKEN_SPEC = [
    ("PRAGMA", r"--@[^\n]*"),
    ("COMMENT", r"--[^\n]*"),
    ("BLOCK", r"/\*.*?\*/"),
    ("UNTERMINATED", r"/\*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r\f]+"),
    ("INT", r"\d+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("SYMBOL", r"<<|>>|<>|<=|>=|\.\.|->|[\^()\[\]{},;:=<>+\-*/.|]"),
    ("MISMATCH", r"."),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC), re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int

    @property
    def pos(self) -> SourcePos:
        return SourcePos(self.line, self.col)

    def describe(self) -> str:
        if self.kind is TokenKind.EOF:
            return "end of file"
        return f"'{self.text}'"


def tokenize(source: str, filename: str | None = None) -> list[Token]:
    tokens: list[Token] = []
    line, line_start = 1, 0
    for match in _MASTER.finditer(source):
        kind = match.lastgroup
        text = match.group()
        col = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind in ("SKIP", "COMMENT"):
            continue
        if kind == "BLOCK":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + text.rfind("\n") + 1
            continue
        if kind == "UNTERMINATED":
            raise ScadeSyntaxError("unterminated comment", SourcePos(line, col), filename)
        if kind == "MISMATCH":
            raise ScadeSyntaxError(f"unexpected character {text!r}", SourcePos(line, col), filename)
        if kind == "PRAGMA":
            tokens.append(Token(TokenKind.PRAGMA, text[3:].strip(), line, col))
        elif kind == "INT":
            tokens.append(Token(TokenKind.INT, text, line, col))
        elif kind == "IDENT":
            token_kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(token_kind, text, line, col))
        else:
            tokens.append(Token(TokenKind.SYMBOL, text, line, col))
    tokens.append(Token(TokenKind.EOF, "", line, len(source) - line_start + 1))
    return tokens
