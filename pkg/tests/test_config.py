import pytest
from pydantic import ValidationError

from scade2b.core.config import Settings
from scade2b.schemas.config_schema import Config


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("SCADE2B_MAX_STATES", "50")
    monkeypatch.setenv("SCADE2B_LOG_LEVEL", " debug ")
    monkeypatch.setenv("SCADE2B_EMITTER_FLAVOR", "unicode")
    s = Settings()
    assert s.MAX_STATES == 50
    assert s.LOG_LEVEL == "DEBUG"
    assert s.EMITTER_FLAVOR == "unicode"


def test_non_positive_limits_are_rejected(monkeypatch):
    monkeypatch.setenv("SCADE2B_INDENT_WIDTH", "0")
    with pytest.raises(ValidationError):
        Settings()


def test_unknown_flavor_is_rejected(monkeypatch):
    monkeypatch.setenv("SCADE2B_EMITTER_FLAVOR", "latex")
    with pytest.raises(ValidationError):
        Settings()


@pytest.mark.parametrize(
    "fields",
    [
        {"command": "translate", "inputs": []},
        {"command": "simulate", "inputs": ["a.scade"], "trace": "t", "cycles": 3},
        {"command": "check", "inputs": ["a.scade"], "mutate": "drop-shift:0"},
        {"command": "simulate", "inputs": ["a.scade"], "mutate": "drop-shift:0", "side": "b"},
        {"command": "translate", "inputs": ["a.scade"], "export": "cx.trace"},
    ],
)
def test_invalid_invocations(fields):
    with pytest.raises(ValidationError):
        Config(**fields)


def test_valid_invocation():
    config = Config(command="check", inputs=["a.scade"], max_states=10, domains=["x=0..3"])
    assert config.side == "both"
    assert config.domains == ["x=0..3"]
