"""
FastAPI inference service over a trained checkpoint.
"""
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import psutil
from fastapi import FastAPI

from skipsnn import __version__
from skipsnn.config.settings import CHECKPOINT_PATH, DEBUG
from skipsnn.errors import CheckpointError
from skipsnn.logs.logger import audit_log, logger
from skipsnn.service.error_handler import setup_error_handlers
from skipsnn.service.middleware import RequestLoggingMiddleware
from skipsnn.service.monitoring import PrometheusMiddleware, health_router, metrics_router
from skipsnn.service.routes import router as inference_router
from skipsnn.snn.params import ModelParams, load_checkpoint


@dataclass
class LoadedModel:
    params: ModelParams
    metadata: dict
    path: Path


def load_model(checkpoint: Optional[Union[str, Path]]) -> Optional[LoadedModel]:
    """None when no checkpoint is configured or it cannot be read"""
    if not checkpoint:
        logger.warning("No checkpoint configured; /predict will answer 503")
        return None
    try:
        params, metadata = load_checkpoint(checkpoint)
    except CheckpointError as exc:
        logger.error(f"Could not load checkpoint: {exc}")
        return None
    logger.info(f"Loaded checkpoint {checkpoint} (layers {params.layer_sizes})")
    return LoadedModel(params=params, metadata=metadata, path=Path(checkpoint))


def create_app(checkpoint: Optional[Union[str, Path]] = None, debug: Optional[bool] = None) -> FastAPI:
    checkpoint = checkpoint or CHECKPOINT_PATH
    debug = DEBUG if debug is None else debug

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        logger.info("Starting up SkipSNN inference service")
        memory = psutil.virtual_memory()
        logger.info(f"System: {psutil.cpu_count()} CPUs, {memory.total / (1024 ** 3):.2f} GB RAM")
        app.state.model = load_model(checkpoint)
        audit_log(
            event_type="service_startup",
            details=f"SkipSNN service v{app.version} started (model loaded: {app.state.model is not None})",
        )
        yield
        logger.info("Shutting down SkipSNN inference service")
        app.state.model = None
        audit_log(event_type="service_shutdown", details="SkipSNN service shutdown initiated")

    app = FastAPI(
        title="SkipSNN inference",
        description="Spiking classifier with a learned input gate",
        version=__version__,
        debug=debug,
        lifespan=lifespan,
    )
    app.state.model = None
    app.add_middleware(RequestLoggingMiddleware)
    app.add_middleware(PrometheusMiddleware)
    setup_error_handlers(app)

    @app.get("/")
    async def root():
        return {"message": "SkipSNN inference service", "version": app.version, "docs": "/docs", "health": "/health"}

    app.include_router(inference_router)
    app.include_router(health_router)
    app.include_router(metrics_router)
    return app
