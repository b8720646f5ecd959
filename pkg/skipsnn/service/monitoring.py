"""
Prometheus metrics and health endpoints for the inference service.
"""
import platform
import time
from datetime import datetime
from typing import Any, Callable, Dict

import psutil
from fastapi import APIRouter, Request, Response
from prometheus_client import CONTENT_TYPE_LATEST, Counter, Histogram, generate_latest
from starlette.middleware.base import BaseHTTPMiddleware

from skipsnn import __version__

start_time = datetime.now()

REQUEST_COUNT = Counter(
    "skipsnn_requests_total",
    "Total count of requests by method and path",
    ["method", "path", "status_code"],
)

REQUEST_LATENCY = Histogram(
    "skipsnn_request_latency_seconds",
    "Request latency in seconds by method and path",
    ["method", "path"],
    buckets=[0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0],
)

ERROR_COUNT = Counter(
    "skipsnn_errors_total",
    "Total count of errors by method and path",
    ["method", "path", "error_type"],
)

PREDICTION_COUNT = Counter(
    "skipsnn_predictions_total",
    "Predictions served, by gate mode",
    ["gate_mode"],
)

AWAKE_STEPS = Counter(
    "skipsnn_awake_steps_total",
    "Timesteps processed with the input gate open",
)

INFERENCE_MFLOPS = Counter(
    "skipsnn_inference_mflops_total",
    "Event-driven MFLOPs spent on inference",
)

metrics_router = APIRouter(prefix="/metrics", tags=["monitoring"])
health_router = APIRouter(prefix="/health", tags=["monitoring"])


class PrometheusMiddleware(BaseHTTPMiddleware):
    """Request counters and latency histograms"""

    async def dispatch(self, request: Request, call_next: Callable):
        # Skip the scrape endpoint itself
        if request.url.path == "/metrics/prometheus":
            return await call_next(request)

        started = time.time()
        try:
            response = await call_next(request)
        except Exception as exc:
            ERROR_COUNT.labels(method=request.method, path=request.url.path, error_type=type(exc).__name__).inc()
            raise
        REQUEST_LATENCY.labels(method=request.method, path=request.url.path).observe(time.time() - started)
        REQUEST_COUNT.labels(method=request.method, path=request.url.path, status_code=response.status_code).inc()
        return response


def record_prediction(gate_mode: str, awake_steps: float, mflops: float) -> None:
    PREDICTION_COUNT.labels(gate_mode=gate_mode).inc()
    AWAKE_STEPS.inc(awake_steps)
    INFERENCE_MFLOPS.inc(mflops)


def get_system_info() -> Dict[str, Any]:
    """CPU, memory and platform snapshot"""
    memory = psutil.virtual_memory()
    return {
        "cpu": {"percent": psutil.cpu_percent(interval=0.1), "cores": psutil.cpu_count()},
        "memory": {"total": memory.total, "available": memory.available, "percent": memory.percent},
        "platform": platform.platform(),
        "python_version": platform.python_version(),
    }


def _uptime() -> str:
    return str(datetime.now() - start_time).split(".")[0]


@metrics_router.get("/prometheus")
async def prometheus_metrics():
    return Response(content=generate_latest(), media_type=CONTENT_TYPE_LATEST)


@health_router.get("")
async def health_check(request: Request):
    """Service status plus whether a model is loaded"""
    return {
        "status": "ok",
        "version": __version__,
        "model_loaded": getattr(request.app.state, "model", None) is not None,
        "timestamp": datetime.now().isoformat(),
        "request_id": getattr(request.state, "request_id", None),
    }


@health_router.get("/liveness")
async def liveness_check():
    return {"status": "alive", "timestamp": datetime.now().isoformat(), "uptime": _uptime()}


@health_router.get("/metrics")
async def health_metrics(request: Request):
    served = sum(
        sample.value
        for metric in PREDICTION_COUNT.collect()
        for sample in metric.samples
        if sample.name.endswith("_total")
    )
    return {
        "timestamp": datetime.now().isoformat(),
        "system": get_system_info(),
        "application": {
            "uptime": _uptime(),
            "predictions": served,
            "model_loaded": getattr(request.app.state, "model", None) is not None,
        },
    }
