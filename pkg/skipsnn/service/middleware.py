"""
Structured request logging.
"""
import time
import uuid

from fastapi import Request
from starlette.middleware.base import BaseHTTPMiddleware

from skipsnn.logs.logger import logger


class RequestLoggingMiddleware(BaseHTTPMiddleware):
    """
    Logs every request and response under a per-request id and adds
    X-Request-ID / X-Process-Time headers.
    """

    async def dispatch(self, request: Request, call_next):
        request_id = str(uuid.uuid4())
        request.state.request_id = request_id
        started = time.time()
        context = {
            "access": True,
            "request_id": request_id,
            "client_ip": request.client.host if request.client else None,
            "method": request.method,
            "path": request.url.path,
        }

        with logger.contextualize(**context):
            logger.info(f"REQUEST: {request.method} {request.url.path}")
            try:
                response = await call_next(request)
            except Exception as exc:
                logger.error(f"EXCEPTION: {exc} after {time.time() - started:.4f}s")
                raise
            elapsed = time.time() - started
            logger.info(f"RESPONSE: {response.status_code} - {elapsed:.4f}s")

        response.headers["X-Process-Time"] = f"{elapsed:.4f}"
        response.headers["X-Request-ID"] = request_id
        return response
