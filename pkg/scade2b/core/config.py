from functools import lru_cache
from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"

    # Emitter
    EMITTER_FLAVOR: Literal["ascii", "unicode"] = "ascii"
    INDENT_WIDTH: int = 4

    # Model checking
    MAX_STATES: int = 100000
    MAX_DOMAIN_SIZE: int = 4096

    # Simulation
    DEFAULT_TRACE_CYCLES: int = 20

    API_PREFIX: str = "/api/v1"

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_level(cls, v):
        if isinstance(v, str):
            return v.strip().upper()
        return v

    @field_validator("INDENT_WIDTH", "MAX_STATES", "MAX_DOMAIN_SIZE", "DEFAULT_TRACE_CYCLES")
    @classmethod
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    class Config:
        env_file = ".env"
        env_prefix = "SCADE2B_"
        extra = "ignore"


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
