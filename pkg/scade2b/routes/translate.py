from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from scade2b.schemas.translate_schema import TranslateRequest, TranslateResponse
from scade2b.services.b_validator import validate_machine
from scade2b.services.pipeline_service import translate_source

router = APIRouter(prefix="/translate", tags=["translate"])


@router.post("", response_model=TranslateResponse)
async def route_translate(payload: TranslateRequest):
    compiled, text = await run_in_threadpool(
        translate_source,
        payload.source,
        payload.filename,
        payload.machine_name,
        "unicode" if payload.unicode else "ascii",
    )
    machine = compiled.machine
    return TranslateResponse(
        machine=machine.name,
        text=text,
        operations=[op.name for op in machine.operations],
        variables=list(machine.variables),
        diagnostics=validate_machine(machine),
    )
