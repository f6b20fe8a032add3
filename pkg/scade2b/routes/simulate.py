from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from scade2b.schemas.simulate_schema import SimulateRequest, SimulateResponse
from scade2b.services.pipeline_service import compile_source, resolve_trace, simulate

router = APIRouter(prefix="/simulate", tags=["simulate"])


def _simulate(payload: SimulateRequest):
    compiled = compile_source(payload.source)
    trace = resolve_trace(compiled, payload.trace, payload.seed, payload.cycles, payload.bounds, payload.node)
    return simulate(compiled, trace, payload.node, payload.mutate)


@router.post("", response_model=SimulateResponse)
async def route_simulate(payload: SimulateRequest):
    report = await run_in_threadpool(_simulate, payload)
    return SimulateResponse.from_report(report)
