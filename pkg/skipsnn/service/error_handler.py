import traceback

from fastapi import Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from skipsnn.errors import SkipSNNError
from skipsnn.logs.logger import logger


def _error_list(errors) -> list:
    return [{"loc": list(e["loc"]), "msg": e["msg"], "type": e["type"]} for e in errors]


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    """Malformed request bodies: 422 with one entry per failing field"""
    logger.warning(f"Validation error: {exc.errors()}")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": "Validation error", "errors": _error_list(exc.errors())},
    )


async def engine_exception_handler(request: Request, exc: SkipSNNError):
    """Engine errors (shape mismatch, bad mask, ...) are client errors"""
    logger.warning(f"{type(exc).__name__}: {exc}")
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": str(exc), "errors": [{"loc": [], "msg": str(exc), "type": type(exc).__name__}]},
    )


async def http_exception_handler(request: Request, exc: StarletteHTTPException):
    logger.warning(f"HTTP error {exc.status_code}: {exc.detail}")
    return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})


async def internal_exception_handler(request: Request, exc: Exception):
    """Anything else: log the traceback, return a generic 500"""
    logger.error(f"Unhandled exception: {exc}")
    logger.error("".join(traceback.format_exception(type(exc), exc, exc.__traceback__)))
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": "An internal server error occurred"},
    )


def setup_error_handlers(app) -> None:
    app.add_exception_handler(RequestValidationError, validation_exception_handler)
    app.add_exception_handler(SkipSNNError, engine_exception_handler)
    app.add_exception_handler(StarletteHTTPException, http_exception_handler)
    app.add_exception_handler(Exception, internal_exception_handler)
    logger.info("Error handlers configured")
