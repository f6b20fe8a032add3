from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from scade2b.core.errors import DiagnosticKind
from scade2b.models.values import Value


# ---- SCADE side ----

@dataclass(frozen=True)
class NodeState:
    fby_buffers: Mapping[int, tuple[Value, ...]] = field(default_factory=dict)
    sm_states: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CycleIO:
    inputs: Mapping[str, Value]
    outputs: Mapping[str, Value]


@dataclass(frozen=True)
class Trace:
    cycles: tuple[Mapping[str, Value], ...]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.cycles)


# ---- B side ----

@dataclass(frozen=True)
class BState:
    """Full valuation of the machine variables, in VARIABLES order."""

    values: tuple[tuple[str, Value], ...]

    def __getitem__(self, name: str) -> Value:
        for key, value in self.values:
            if key == name:
                return value
        raise KeyError(name)

    def as_dict(self) -> dict[str, Value]:
        return dict(self.values)


@dataclass(frozen=True)
class Diagnostic:
    kind: DiagnosticKind
    location: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.kind.value} at {self.location}"
        return f"{text}: {self.detail}" if self.detail else text


@dataclass(frozen=True)
class InvokeResult:
    outputs: Mapping[str, Value]
    state: BState
    diagnostics: tuple[Diagnostic, ...] = ()
    error: DiagnosticKind | None = None
    invariant_holds: bool = True

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def while_diagnostics(self) -> tuple[Diagnostic, ...]:
        return tuple(
            d for d in self.diagnostics
            if d.location.startswith("WHILE")
        )


@dataclass(frozen=True)
class InvariantCheck:
    holds: bool
    conjunct_index: int | None = None
    conjunct: str | None = None

    def __bool__(self) -> bool:
        return self.holds


# ---- harness ----

class DivergenceKind(str, Enum):
    OUTPUT = "output"
    MAPPED_STATE = "mapped-state"
    RUNTIME_ERROR = "runtime-error"


@dataclass(frozen=True)
class Divergence:
    cycle: int
    kind: DivergenceKind
    name: str
    scade_value: str
    b_value: str


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    inputs: Mapping[str, Value]
    scade_outputs: Mapping[str, Value]
    b_outputs: Mapping[str, Value]
    error: DiagnosticKind | None = None


@dataclass(frozen=True)
class DiffReport:
    status: str  # "equivalent" or "divergent"
    cycles_compared: int
    divergence: Divergence | None = None
    records: tuple[CycleRecord, ...] = ()
    while_diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def equivalent(self) -> bool:
        return self.status == "equivalent"


# ---- model checking ----

@dataclass(frozen=True)
class Step:
    operation: str
    args: tuple[tuple[str, Value], ...]
    outputs: tuple[tuple[str, Value], ...]
    state: BState


@dataclass(frozen=True)
class Counterexample:
    steps: tuple[Step, ...]
    initial_state: BState | None = None
    failing_conjunct: str | None = None

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Domains:
    """Per operation, per parameter: the finite list of values to try."""

    values: Mapping[str, Mapping[str, tuple[Value, ...]]]

    def for_operation(self, name: str) -> Mapping[str, tuple[Value, ...]]:
        return self.values.get(name, {})


@dataclass(frozen=True)
class Verified:
    states_visited: int
    transitions_fired: int
    status: str = "verified"


@dataclass(frozen=True)
class Violation:
    counterexample: Counterexample
    states_visited: int
    transitions_fired: int
    status: str = "violation"


@dataclass(frozen=True)
class BoundExceeded:
    states_visited: int
    bound: int
    status: str = "bound-exceeded"


ExploreResult = Verified | Violation | BoundExceeded
