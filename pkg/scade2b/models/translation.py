from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from scade2b.models.b_ast import BMachine


@dataclass(frozen=True)
class NodeBinding:
    """How one SCADE node maps onto the machine."""

    node: str
    operation: str
    inputs: tuple[tuple[str, str], ...]
    outputs: tuple[tuple[str, str], ...]
    # fby instance -> buffer variable
    fby: Mapping[int, str] = field(default_factory=dict)
    # automaton name -> state variable
    automata: Mapping[str, str] = field(default_factory=dict)

    def b_name(self, scade_name: str) -> str:
        for source, target in (*self.inputs, *self.outputs):
            if source == scade_name:
                return target
        raise KeyError(scade_name)


@dataclass(frozen=True)
class TranslationResult:
    machine: BMachine
    bindings: Mapping[str, NodeBinding]
    # SCADE identifier -> B identifier, for every renamed name
    names: Mapping[str, str] = field(default_factory=dict)

    def binding(self, node: str | None = None) -> NodeBinding:
        if node is None:
            return list(self.bindings.values())[-1]
        return self.bindings[node]
