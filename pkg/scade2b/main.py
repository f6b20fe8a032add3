import logging

from fastapi import FastAPI, Request, status
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from scade2b import __version__
from scade2b.core.config import settings
from scade2b.core.errors import (
    ConfigurationError,
    FrontendError,
    RuntimeFault,
    Scade2BError,
    TranslationError,
)
from scade2b.core.logging import configure_logging
from scade2b.routes.check import router as check_router
from scade2b.routes.simulate import router as simulate_router
from scade2b.routes.translate import router as translate_router

logger = logging.getLogger(__name__)


def _diagnostics(exc: Scade2BError) -> list[dict]:
    entry: dict = {"message": exc.message, "kind": type(exc).__name__}
    if exc.pos is not None:
        entry.update(line=exc.pos.line, col=exc.pos.col)
    if isinstance(exc, RuntimeFault):
        entry["kind"] = exc.kind.value
    return [entry]


def create_app() -> FastAPI:
    configure_logging()
    app = FastAPI(title="scade2b", version=__version__)

    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(request: Request, exc: StarletteHTTPException):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content={"detail": jsonable_encoder(exc.errors())},
        )

    @app.exception_handler(FrontendError)
    async def frontend_exception_handler(request: Request, exc: FrontendError):
        return JSONResponse(
            status_code=status.HTTP_400_BAD_REQUEST,
            content={"detail": str(exc), "diagnostics": _diagnostics(exc)},
        )

    @app.exception_handler(TranslationError)
    @app.exception_handler(ConfigurationError)
    async def unprocessable_exception_handler(request: Request, exc: Scade2BError):
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content={"detail": str(exc), "diagnostics": _diagnostics(exc)},
        )

    @app.exception_handler(RuntimeFault)
    async def runtime_exception_handler(request: Request, exc: RuntimeFault):
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content={"detail": str(exc), "diagnostics": _diagnostics(exc)},
        )

    @app.exception_handler(Exception)
    async def global_exception_handler(request: Request, exc: Exception):
        logger.exception("unhandled exception on %s", request.url.path)
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content={"detail": f"Internal server error: {exc}"},
        )

    app.include_router(translate_router, prefix=settings.API_PREFIX)
    app.include_router(simulate_router, prefix=settings.API_PREFIX)
    app.include_router(check_router, prefix=settings.API_PREFIX)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "version": __version__, "emitter": settings.EMITTER_FLAVOR}

    return app


app = create_app()
