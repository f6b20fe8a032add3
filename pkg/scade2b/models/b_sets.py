from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from scade2b.models.values import ArrayValue, RecordValue, Value


class BSet:
    """A set value the machine interpreter can test membership in."""

    def contains(self, value: Value) -> bool:
        raise NotImplementedError

    def size(self) -> int | None:
        """Cardinality, or None for an infinite set."""
        return None

    def members(self) -> Iterator[Value]:
        raise ValueError(f"{self} cannot be enumerated")


@dataclass(frozen=True)
class IntervalSet(BSet):
    low: int
    high: int

    def contains(self, value: Value) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and self.low <= value <= self.high

    def size(self) -> int:
        return max(0, self.high - self.low + 1)

    def members(self) -> Iterator[Value]:
        return iter(range(self.low, self.high + 1))

    def __str__(self) -> str:
        return f"{self.low}..{self.high}"


@dataclass(frozen=True)
class IntegerSet(BSet):
    # INTEGER when low is None, NATURAL when low is 0
    low: int | None = None

    def contains(self, value: Value) -> bool:
        if not isinstance(value, int) or isinstance(value, bool):
            return False
        return self.low is None or value >= self.low

    def __str__(self) -> str:
        return "INTEGER" if self.low is None else "NATURAL"


@dataclass(frozen=True)
class FiniteSet(BSet):
    name: str
    elements: tuple[Value, ...]

    def contains(self, value: Value) -> bool:
        return any(type(value) is type(e) and value == e for e in self.elements)

    def size(self) -> int:
        return len(self.elements)

    def members(self) -> Iterator[Value]:
        return iter(self.elements)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FunctionSet(BSet):
    """Total functions ``low..high --> range``, held as arrays indexed from 0."""

    domain: IntervalSet
    range: BSet

    def contains(self, value: Value) -> bool:
        if not isinstance(value, ArrayValue) or self.domain.low != 0 or len(value) != self.domain.size():
            return False
        return all(self.range.contains(cell) for cell in value.cells)

    def size(self) -> int | None:
        inner = self.range.size()
        return None if inner is None else inner ** self.domain.size()

    def members(self) -> Iterator[Value]:
        cells = [list(self.range.members())] * self.domain.size()
        return (ArrayValue(tuple(combo)) for combo in itertools.product(*cells))

    def __str__(self) -> str:
        return f"{self.domain} --> {self.range}"


@dataclass(frozen=True)
class StructSet(BSet):
    fields: tuple[tuple[str, BSet], ...]

    def contains(self, value: Value) -> bool:
        if not isinstance(value, RecordValue) or value.names != tuple(name for name, _ in self.fields):
            return False
        return all(field.contains(value.get(name)) for name, field in self.fields)

    def size(self) -> int | None:
        total = 1
        for _, field in self.fields:
            inner = field.size()
            if inner is None:
                return None
            total *= inner
        return total

    def members(self) -> Iterator[Value]:
        names = [name for name, _ in self.fields]
        pools = [list(field.members()) for _, field in self.fields]
        return (RecordValue(tuple(zip(names, combo))) for combo in itertools.product(*pools))

    def __str__(self) -> str:
        return "struct(" + ", ".join(f"{name}: {field}" for name, field in self.fields) + ")"


BOOL_SET = FiniteSet("BOOL", (False, True))
