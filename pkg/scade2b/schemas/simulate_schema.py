from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field, model_validator

from scade2b.core.config import settings
from scade2b.models.runtime import DiffReport
from scade2b.models.values import value_to_json


class SimulateRequest(BaseModel):
    source: str = Field(min_length=1)
    trace: str | None = None
    seed: int = 0
    cycles: int = Field(default=settings.DEFAULT_TRACE_CYCLES, ge=0, le=10000)
    node: str | None = None
    bounds: dict[str, tuple[int, int]] | None = None
    mutate: str | None = None

    @model_validator(mode="after")
    def bounds_ordered(self) -> "SimulateRequest":
        for name, (low, high) in (self.bounds or {}).items():
            if low > high:
                raise ValueError(f"empty range for {name}")
        return self


class DivergenceOut(BaseModel):
    cycle: int
    kind: str
    name: str
    scade_value: str
    b_value: str


class CycleOut(BaseModel):
    cycle: int
    inputs: dict[str, Any]
    scade_outputs: dict[str, Any]
    b_outputs: dict[str, Any]
    error: str | None = None


class SimulateResponse(BaseModel):
    status: str
    cycles_compared: int
    divergence: DivergenceOut | None = None
    cycles: list[CycleOut] = Field(default_factory=list)
    while_diagnostics: list[str] = Field(default_factory=list)

    @classmethod
    def from_report(cls, report: DiffReport) -> "SimulateResponse":
        divergence = None
        if report.divergence is not None:
            d = report.divergence
            divergence = DivergenceOut(
                cycle=d.cycle, kind=d.kind.value, name=d.name, scade_value=d.scade_value, b_value=d.b_value
            )
        return cls(
            status=report.status,
            cycles_compared=report.cycles_compared,
            divergence=divergence,
            cycles=[
                CycleOut(
                    cycle=r.cycle,
                    inputs={k: value_to_json(v) for k, v in r.inputs.items()},
                    scade_outputs={k: value_to_json(v) for k, v in r.scade_outputs.items()},
                    b_outputs={k: value_to_json(v) for k, v in r.b_outputs.items()},
                    error=r.error.value if r.error is not None else None,
                )
                for r in report.records
            ],
            while_diagnostics=[str(d) for d in report.while_diagnostics],
        )
