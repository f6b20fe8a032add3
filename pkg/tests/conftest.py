from pathlib import Path

import pytest

from scade2b.services.pipeline_service import Compiled, compile_source
from scade2b.utils.trace_format import parse_trace

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def compile_fixture(name: str) -> Compiled:
    return compile_source(fixture_text(name), name)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def compute_sum() -> Compiled:
    return compile_fixture("appendix1.scade")


@pytest.fixture
def protocol_unsafe() -> Compiled:
    return compile_fixture("appendix3.scade")


@pytest.fixture
def protocol_safe() -> Compiled:
    return compile_fixture("appendix5.scade")


@pytest.fixture
def experiment_trace():
    return parse_trace(fixture_text("experiment1.trace"), "experiment1.trace")
