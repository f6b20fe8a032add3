from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class Config(BaseModel):
    """One command-line invocation, after flags are layered over the settings."""

    command: Literal["translate", "simulate", "check"]
    inputs: list[str] = Field(default_factory=list)
    output: str | None = None
    trace: str | None = None
    seed: int | None = None
    cycles: int | None = Field(default=None, ge=0)
    side: Literal["scade", "b", "both"] = "both"
    node: str | None = None
    machine_name: str | None = None
    max_states: int | None = Field(default=None, ge=1)
    flavor: Literal["ascii", "unicode"] | None = None
    domains: list[str] = Field(default_factory=list)
    mutate: str | None = None
    export: str | None = None

    @model_validator(mode="after")
    def required_paths(self) -> "Config":
        if len(self.inputs) != 1:
            raise ValueError(f"{self.command} takes exactly one input file")
        if self.trace is not None and (self.seed is not None or self.cycles is not None):
            raise ValueError("give either --trace or --seed/--cycles, not both")
        if self.command != "simulate" and (self.trace or self.mutate):
            raise ValueError("--trace and --mutate only apply to simulate")
        if self.mutate and self.side != "both":
            raise ValueError("--mutate needs --side both")
        if self.command != "check" and self.export:
            raise ValueError("--export only applies to check")
        return self
