from pydantic import BaseModel, Field


class TranslateRequest(BaseModel):
    source: str = Field(min_length=1)
    filename: str | None = None
    machine_name: str | None = None
    unicode: bool = False


class TranslateResponse(BaseModel):
    machine: str
    text: str
    operations: list[str]
    variables: list[str]
    diagnostics: list[str] = Field(default_factory=list)
