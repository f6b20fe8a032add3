from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from scade2b.schemas.check_schema import CheckRequest, CheckResponse
from scade2b.services.pipeline_service import check, compile_source

router = APIRouter(prefix="/check", tags=["check"])


def _check(payload: CheckRequest):
    return check(compile_source(payload.source), payload.max_states, payload.domains)


@router.post("", response_model=CheckResponse)
async def route_check(payload: CheckRequest):
    result = await run_in_threadpool(_check, payload)
    return CheckResponse.from_result(result)
