from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from skipsnn.snn.forward import GateMode


# Request body for a single-sample prediction
class PredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    channels: int = Field(..., ge=1, description="Number of input channels P")
    horizon: int = Field(..., ge=1, description="Number of timesteps T")
    events: List[Tuple[int, int]] = Field(default_factory=list, description="[t, channel] pairs")
    gate_mode: GateMode = GateMode.LEARNED
    mask: Optional[List[int]] = Field(None, description="Awake schedule for gate_mode=external")

    @model_validator(mode="after")
    def check_ranges(self):
        for t, ch in self.events:
            if not 0 <= t < self.horizon or not 0 <= ch < self.channels:
                raise ValueError(f"event ({t}, {ch}) outside horizon {self.horizon} / channels {self.channels}")
        if self.gate_mode == GateMode.EXTERNAL:
            if self.mask is None:
                raise ValueError("gate_mode 'external' requires a mask")
            if len(self.mask) != self.horizon:
                raise ValueError(f"mask length {len(self.mask)} != horizon {self.horizon}")
            if any(bit not in (0, 1) for bit in self.mask):
                raise ValueError("mask entries must be 0 or 1")
        elif self.mask is not None:
            raise ValueError("mask is only accepted with gate_mode 'external'")
        return self


class PredictResponse(BaseModel):
    prediction: int
    scores: List[float]
    awake_fraction: float
    mflops: float
    ledger: Dict


class ModelInfo(BaseModel):
    loaded: bool
    checkpoint: Optional[str] = None
    layer_sizes: Optional[List[int]] = None
    num_classes: Optional[int] = None
    pulse_periods: Optional[List[int]] = None
