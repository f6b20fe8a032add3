from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from scade2b.models.runtime import BoundExceeded, ExploreResult, Verified
from scade2b.models.values import value_to_json
from scade2b.services.checker_service import render_counterexample


class CheckRequest(BaseModel):
    source: str = Field(min_length=1)
    max_states: int | None = Field(default=None, ge=1)
    domains: dict[str, tuple[int, int]] | None = None


class StepOut(BaseModel):
    position: int
    operation: str
    args: dict[str, Any]
    outputs: dict[str, Any]
    state: dict[str, Any]


class CheckResponse(BaseModel):
    status: str
    states_visited: int
    transitions_fired: int | None = None
    bound: int | None = None
    counterexample: list[StepOut] | None = None
    failing_conjunct: str | None = None
    table: str | None = None

    @classmethod
    def from_result(cls, result: ExploreResult) -> "CheckResponse":
        if isinstance(result, Verified):
            return cls(status=result.status, states_visited=result.states_visited, transitions_fired=result.transitions_fired)
        if isinstance(result, BoundExceeded):
            return cls(status=result.status, states_visited=result.states_visited, bound=result.bound)
        cx = result.counterexample
        steps = [
            StepOut(
                position=position,
                operation=step.operation,
                args={k: value_to_json(v) for k, v in step.args},
                outputs={k: value_to_json(v) for k, v in step.outputs},
                state={k: value_to_json(v) for k, v in step.state.values},
            )
            for position, step in enumerate(cx.steps, start=1)
        ]
        return cls(
            status=result.status,
            states_visited=result.states_visited,
            transitions_fired=result.transitions_fired,
            counterexample=steps,
            failing_conjunct=cx.failing_conjunct,
            table=render_counterexample(cx),
        )
