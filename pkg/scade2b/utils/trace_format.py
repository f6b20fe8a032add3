"""Reading and writing the line-oriented trace format.

One cycle per line, space separated ``name=value`` pairs. Integers are
decimal, booleans ``true``/``false``, enum members bare identifiers, arrays
``[v0,v1,...]`` and records ``{field:value,...}``. ``#`` starts a comment line.
"""
from __future__ import annotations

import re
from typing import Iterable, Mapping

from scade2b.core.errors import ConfigurationError
from scade2b.models.runtime import Counterexample, Trace
from scade2b.models.values import ArrayValue, EnumMember, RecordValue, Value, format_value

_TOKEN = re.compile(r"\s*(?:(-?\d+)|([A-Za-z_][A-Za-z0-9_]*)|([=\[\]{},:]))")


def _tokens(text: str, where: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ConfigurationError(f"{where}: unexpected character {text[pos]!r}")
        tokens.append(match.group(match.lastindex))
        pos = match.end()
    return tokens


class _ValueReader:
    def __init__(self, tokens: list[str], where: str):
        self.tokens = tokens
        self.pos = 0
        self.where = where

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        token = self.peek()
        if token is None or (expected is not None and token != expected):
            wanted = f"'{expected}'" if expected else "a value"
            raise ConfigurationError(f"{self.where}: expected {wanted}, found {token or 'end of line'}")
        self.pos += 1
        return token

    def value(self) -> Value:
        token = self.take()
        if token == "[":
            cells: list[Value] = []
            if self.peek() != "]":
                cells.append(self.value())
                while self.peek() == ",":
                    self.take(",")
                    cells.append(self.value())
            self.take("]")
            return ArrayValue(tuple(cells))
        if token == "{":
            fields: list[tuple[str, Value]] = []
            if self.peek() != "}":
                fields.append(self.field())
                while self.peek() == ",":
                    self.take(",")
                    fields.append(self.field())
            self.take("}")
            return RecordValue(tuple(fields))
        if token in ("true", "false"):
            return token == "true"
        if re.fullmatch(r"-?\d+", token):
            return int(token)
        if re.fullmatch(r"[A-Za-z_]\w*", token):
            return EnumMember(token)
        raise ConfigurationError(f"{self.where}: unexpected {token!r}")

    def field(self) -> tuple[str, Value]:
        name = self.take()
        self.take(":")
        return name, self.value()


def parse_value(text: str) -> Value:
    reader = _ValueReader(_tokens(text, "value"), "value")
    value = reader.value()
    if reader.peek() is not None:
        raise ConfigurationError(f"value: trailing text after {text!r}")
    return value


def parse_cycle(line: str, where: str = "trace") -> dict[str, Value]:
    reader = _ValueReader(_tokens(line, where), where)
    cycle: dict[str, Value] = {}
    while reader.peek() is not None:
        name = reader.take()
        if not re.fullmatch(r"[A-Za-z_]\w*", name):
            raise ConfigurationError(f"{where}: expected a name, found {name!r}")
        reader.take("=")
        if name in cycle:
            raise ConfigurationError(f"{where}: {name} given twice")
        cycle[name] = reader.value()
    return cycle


def parse_trace(text: str, provenance: str = "") -> Trace:
    cycles = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cycles.append(parse_cycle(stripped, f"{provenance or 'trace'}:{lineno}"))
    return Trace(tuple(cycles), provenance)


def format_cycle(values: Mapping[str, Value]) -> str:
    return " ".join(f"{name}={format_value(value)}" for name, value in values.items())


def format_trace(trace: Trace | Iterable[Mapping[str, Value]]) -> str:
    cycles = trace.cycles if isinstance(trace, Trace) else trace
    lines = [f"# {trace.provenance}"] if isinstance(trace, Trace) and trace.provenance else []
    lines.extend(format_cycle(cycle) for cycle in cycles)
    return "\n".join(lines) + "\n"


def format_counterexample(counterexample: Counterexample) -> str:
    """Counterexample steps as a trace with a leading ``op=`` column."""
    lines = ["# counterexample"]
    if counterexample.failing_conjunct:
        lines.append(f"# violates: {counterexample.failing_conjunct}")
    for step in counterexample.steps:
        lines.append(" ".join([f"op={step.operation}", *(f"{n}={format_value(v)}" for n, v in step.args)]))
    return "\n".join(lines) + "\n"
