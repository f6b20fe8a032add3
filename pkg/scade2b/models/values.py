from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union


@dataclass(frozen=True)
class EnumMember:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrayValue:
    cells: tuple

    def __len__(self) -> int:
        return len(self.cells)

    def __getitem__(self, index: int) -> "Value":
        return self.cells[index]

    def replace(self, index: int, value: "Value") -> "ArrayValue":
        cells = list(self.cells)
        cells[index] = value
        return ArrayValue(tuple(cells))


@dataclass(frozen=True)
class RecordValue:
    fields: tuple[tuple[str, "Value"], ...]

    def get(self, name: str) -> "Value":
        for key, value in self.fields:
            if key == name:
                return value
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(key for key, _ in self.fields)


Value = Union[bool, int, EnumMember, ArrayValue, RecordValue]


def div_trunc(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def mod_trunc(a: int, b: int) -> int:
    return a - b * div_trunc(a, b)


def format_value(value: Value) -> str:
    """Trace-file spelling of a value."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, EnumMember):
        return value.name
    if isinstance(value, ArrayValue):
        return "[" + ",".join(format_value(c) for c in value.cells) + "]"
    if isinstance(value, RecordValue):
        return "{" + ",".join(f"{k}:{format_value(v)}" for k, v in value.fields) + "}"
    raise TypeError(f"not a runtime value: {value!r}")


def format_b_value(value: Value) -> str:
    """B spelling of a value, as shown in counterexample tables."""
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, EnumMember):
        return value.name
    if isinstance(value, ArrayValue):
        return "{" + ", ".join(f"{i} |-> {format_b_value(c)}" for i, c in enumerate(value.cells)) + "}"
    if isinstance(value, RecordValue):
        return "rec(" + ", ".join(f"{k}: {format_b_value(v)}" for k, v in value.fields) + ")"
    raise TypeError(f"not a runtime value: {value!r}")


def rename_value(value: Value, mapping: Mapping[str, str]) -> Value:
    """Rename enum members and record fields, leaving everything else untouched."""
    if not mapping:
        return value
    if isinstance(value, EnumMember):
        return EnumMember(mapping.get(value.name, value.name))
    if isinstance(value, ArrayValue):
        return ArrayValue(tuple(rename_value(c, mapping) for c in value.cells))
    if isinstance(value, RecordValue):
        return RecordValue(tuple((mapping.get(k, k), rename_value(v, mapping)) for k, v in value.fields))
    return value


def value_to_json(value: Value):
    if isinstance(value, (bool, int)):
        return value
    if isinstance(value, EnumMember):
        return value.name
    if isinstance(value, ArrayValue):
        return [value_to_json(c) for c in value.cells]
    if isinstance(value, RecordValue):
        return {k: value_to_json(v) for k, v in value.fields}
    raise TypeError(f"not a runtime value: {value!r}")
