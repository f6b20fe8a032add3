import pytest
from httpx import ASGITransport, AsyncClient

from scade2b.main import create_app
from scade2b.services.b_parser import tokenize
from tests.conftest import fixture_text


def client() -> AsyncClient:
    return AsyncClient(transport=ASGITransport(app=create_app()), base_url="http://test")


@pytest.mark.asyncio
async def test_healthz():
    async with client() as ac:
        r = await ac.get("/healthz")
        assert r.status_code == 200
        data = r.json()
        assert data["status"] == "ok"
        assert set(["version", "emitter"]).issubset(set(data.keys()))


@pytest.mark.asyncio
async def test_translate():
    async with client() as ac:
        r = await ac.post("/api/v1/translate", json={"source": fixture_text("appendix5.scade")})
        assert r.status_code == 200
        data = r.json()
        assert data["machine"] == "CommunicationProtocol"
        assert data["operations"] == ["HandleEvent"]
        assert data["variables"] == ["connection_state", "process_state"]
        assert data["diagnostics"] == []
        assert tokenize(data["text"]) == tokenize(fixture_text("appendix6.mch"))


@pytest.mark.asyncio
async def test_translate_syntax_error_is_a_bad_request():
    async with client() as ac:
        r = await ac.post("/api/v1/translate", json={"source": "node N(a: int32) returns (x: int32)\nlet\n  x = a\ntel\n"})
        assert r.status_code == 400
        (diagnostic,) = r.json()["diagnostics"]
        assert diagnostic["kind"] == "ScadeSyntaxError"
        assert diagnostic["line"] == 4


@pytest.mark.asyncio
async def test_empty_source_is_rejected():
    async with client() as ac:
        r = await ac.post("/api/v1/translate", json={"source": ""})
        assert r.status_code == 422


@pytest.mark.asyncio
async def test_simulate_with_a_trace():
    payload = {"source": fixture_text("appendix1.scade"), "trace": fixture_text("experiment1.trace")}
    async with client() as ac:
        r = await ac.post("/api/v1/simulate", json=payload)
        assert r.status_code == 200
        data = r.json()
        assert data["status"] == "equivalent"
        assert data["cycles_compared"] == 5
        assert data["cycles"][1]["b_outputs"]["output"] == [1, 4, 9, 16, 25]
        assert data["cycles"][1]["b_outputs"]["strucDemo"] == {"fby_data": 1, "move": "Forward"}


@pytest.mark.asyncio
async def test_simulate_mutant():
    payload = {
        "source": fixture_text("appendix1.scade"),
        "trace": fixture_text("experiment1.trace"),
        "mutate": "drop-shift:0",
    }
    async with client() as ac:
        r = await ac.post("/api/v1/simulate", json=payload)
        data = r.json()
        assert data["status"] == "divergent"
        assert data["divergence"]["cycle"] == 4
        assert data["divergence"]["kind"] == "mapped-state"


@pytest.mark.asyncio
async def test_simulate_rejects_an_empty_bound():
    payload = {"source": fixture_text("appendix1.scade"), "bounds": {"input": [5, 1]}}
    async with client() as ac:
        r = await ac.post("/api/v1/simulate", json=payload)
        assert r.status_code == 422


@pytest.mark.asyncio
async def test_check_violation():
    async with client() as ac:
        r = await ac.post("/api/v1/check", json={"source": fixture_text("appendix3.scade")})
        assert r.status_code == 200
        data = r.json()
        assert data["status"] == "violation"
        assert [s["args"]["input_event"] for s in data["counterexample"]] == [
            "ConnectRequest",
            "ConnectAck",
            "DisconnectRequest",
        ]
        assert data["counterexample"][-1]["state"] == {"connection_state": "Disconnecting", "process_state": "Enable"}
        assert "---root---" in data["table"]


@pytest.mark.asyncio
async def test_check_verified():
    async with client() as ac:
        r = await ac.post("/api/v1/check", json={"source": fixture_text("appendix5.scade")})
        data = r.json()
        assert (data["status"], data["states_visited"], data["transitions_fired"]) == ("verified", 4, 16)


@pytest.mark.asyncio
async def test_check_without_domains_is_unprocessable():
    async with client() as ac:
        r = await ac.post("/api/v1/check", json={"source": fixture_text("appendix1.scade")})
        assert r.status_code == 422
        assert "--domain" in r.json()["detail"]
