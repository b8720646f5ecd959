import numpy as np
from fastapi import APIRouter, HTTPException, Request, status

from skipsnn.errors import ShapeMismatchError
from skipsnn.logs.logger import logger
from skipsnn.metrics.ledger import FlopLedger, total_mflops
from skipsnn.service.monitoring import record_prediction
from skipsnn.service.schemas import ModelInfo, PredictRequest, PredictResponse
from skipsnn.snn.forward import GateMode, skipsnn_forward

router = APIRouter(tags=["inference"])


def _loaded_model(request: Request):
    model = getattr(request.app.state, "model", None)
    if model is None:
        raise HTTPException(status_code=status.HTTP_503_SERVICE_UNAVAILABLE, detail="No model loaded")
    return model


@router.get("/model", response_model=ModelInfo)
async def model_info(request: Request):
    model = getattr(request.app.state, "model", None)
    if model is None:
        return ModelInfo(loaded=False)
    params = model.params
    return ModelInfo(
        loaded=True,
        checkpoint=str(model.path),
        layer_sizes=params.layer_sizes,
        num_classes=params.num_classes,
        pulse_periods=list(params.pulse_periods),
    )


@router.post("/predict", response_model=PredictResponse)
def predict(body: PredictRequest, request: Request):
    """
    Classify one sparse-event sample and report how much of it the network
    actually looked at.
    """
    params = _loaded_model(request).params
    if body.channels != params.input_size:
        raise ShapeMismatchError(f"sample has {body.channels} channels, model expects {params.input_size}")

    x = np.zeros((body.channels, body.horizon))
    if body.events:
        events = np.asarray(body.events, dtype=np.int64)
        x[events[:, 1], events[:, 0]] = 1.0

    ledger = FlopLedger()
    mask = np.asarray(body.mask, dtype=np.float64) if body.mask is not None else None
    trace = skipsnn_forward(x, params, body.gate_mode, ledger=ledger, mask=mask)
    scores = trace.rates(params.voting)[0]
    awake = float(trace.gates[:, 0].mean())
    mflops = total_mflops(ledger)

    record_prediction(GateMode(body.gate_mode).value, float(trace.gates.sum()), mflops)
    logger.debug(f"predict: {len(body.events)} events, awake={awake:.3f}, mflops={mflops:.4f}")
    return PredictResponse(
        prediction=int(trace.predictions(params.voting)[0]),
        scores=[float(s) for s in scores],
        awake_fraction=awake,
        mflops=mflops,
        ledger=ledger.to_dict(),
    )
