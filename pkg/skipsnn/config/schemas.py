import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from skipsnn.errors import ConfigError
from skipsnn.logs.logger import logger

CONFIG_VERSION = 1


# Enum for surrogate spike-derivative shapes
class SurrogateKind(str, Enum):
    RECTANGULAR = "rectangular"
    SIGMOID = "sigmoid"
    SIGMOID_FLIPPED = "sigmoid_flipped"
    LOGISTIC_DERIVATIVE = "logistic_derivative"


# Enum for optimizers
class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


# Synthetic dataset description
class DatasetSpec(_Frozen):
    num_channels: int = Field(64, ge=1)
    horizon: int = Field(300, ge=1)
    signal_len: int = Field(50, ge=1)
    num_classes: int = Field(4, ge=1)
    pattern_rate: float = Field(0.3, ge=0.0, le=1.0)
    noise_spikes_per_step: int = Field(1, ge=0)
    seed: int = Field(0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def check_ranges(self):
        if self.signal_len > self.horizon:
            raise ValueError("signal_len must not exceed horizon")
        if self.noise_spikes_per_step > self.num_channels:
            raise ValueError("noise_spikes_per_step must not exceed num_channels")
        return self

    @property
    def useful_fraction(self) -> float:
        """Share of timesteps carrying the class pattern"""
        return self.signal_len / self.horizon

    @classmethod
    def preset(cls, name: str, **overrides) -> "DatasetSpec":
        """Named desk-scale analogues of the two benchmark recipes"""
        presets = {
            "nmnist-like": dict(num_channels=64, horizon=300, signal_len=50, num_classes=4,
                                pattern_rate=0.3, noise_spikes_per_step=1),
            "gesture-like": dict(num_channels=64, horizon=1000, signal_len=400, num_classes=11,
                                 pattern_rate=0.3, noise_spikes_per_step=1),
        }
        if name not in presets:
            raise ConfigError(f"unknown dataset preset '{name}'", "dataset.preset")
        return cls(**{**presets[name], **overrides})


class SplitSizes(_Frozen):
    train: int = Field(2000, ge=0)
    test: int = Field(500, ge=0)


class LifConfig(_Frozen):
    tau: float = Field(0.5, ge=0.0, le=1.0)
    v_th: float = Field(1.0, gt=0.0)


class SurrogateConfig(_Frozen):
    kind: SurrogateKind = SurrogateKind.RECTANGULAR
    epsilon: float = Field(1.0, gt=0.0)
    delta: float = Field(5.0, gt=0.0)
    delta_decay: float = Field(0.5, gt=0.0, lt=1.0)
    anneal_every: int = Field(10, ge=1)

    def delta_at(self, epoch: int) -> float:
        """Annealed pseudo-temperature after `epoch` completed epochs"""
        return self.delta * self.delta_decay ** (epoch // self.anneal_every)


class ArchitectureConfig(_Frozen):
    input_size: Optional[int] = Field(None, ge=1)
    hidden_sizes: List[int] = Field(default_factory=lambda: [128, 64])
    vote_width: int = Field(1, ge=1)
    pulse_periods: List[int] = Field(default_factory=lambda: [1, 10, 100])
    ctrl_init: float = 0.1
    pulse_gain: float = Field(1.2, gt=0.0)
    init_gain: float = Field(1.0, gt=0.0)
    # None keeps the raw Glorot draw
    calibration_quantile: Optional[float] = Field(0.5, gt=0.0, lt=1.0)
    calibration_samples: int = Field(64, ge=1)

    @field_validator("hidden_sizes")
    @classmethod
    def hidden_not_empty(cls, v):
        if not v or any(s < 1 for s in v):
            raise ValueError("hidden_sizes needs at least one positive layer size")
        return v

    @field_validator("pulse_periods")
    @classmethod
    def periods_positive(cls, v):
        if any(p < 1 for p in v):
            raise ValueError("pulse periods must be >= 1")
        return v


class TrainConfig(_Frozen):
    lambda_: float = Field(0.01, alias="lambda", ge=0.0)
    learning_rate: float = Field(1e-3, gt=0.0)
    epochs_stage1: int = Field(50, ge=1)
    epochs_stage2: int = Field(30, ge=1)
    batch_size: int = Field(32, ge=1)
    seed: int = Field(0, ge=0)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(1e-8, gt=0.0)
    patience: int = Field(10, ge=1)
    val_fraction: float = Field(0.1, ge=0.0, lt=1.0)
    train_voting: bool = False
    detach_reset: bool = True


class PolicyGrid(_Frozen):
    fixed_fractions: List[float] = Field(default_factory=lambda: [0.9, 0.5, 0.2, 0.1333])
    random_probs: List[float] = Field(default_factory=lambda: [0.9, 0.5, 0.2, 0.1333])

    @field_validator("fixed_fractions")
    @classmethod
    def fractions_in_range(cls, v):
        if any(not 0.0 < f <= 1.0 for f in v):
            raise ValueError("fixed fractions must lie in (0, 1]")
        return v

    @field_validator("random_probs")
    @classmethod
    def probs_in_range(cls, v):
        if any(not 0.0 <= p <= 1.0 for p in v):
            raise ValueError("random probabilities must lie in [0, 1]")
        return v


class ExperimentConfig(_Frozen):
    config_version: Literal[1] = CONFIG_VERSION
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    splits: SplitSizes = Field(default_factory=SplitSizes)
    architecture: ArchitectureConfig = Field(default_factory=ArchitectureConfig)
    lif: LifConfig = Field(default_factory=LifConfig)
    stage1_surrogate: SurrogateConfig = Field(default_factory=SurrogateConfig)
    stage2_surrogate: SurrogateConfig = Field(
        default_factory=lambda: SurrogateConfig(kind=SurrogateKind.SIGMOID)
    )
    train: TrainConfig = Field(default_factory=TrainConfig)
    lambdas: List[float] = Field(default_factory=lambda: [1e-3, 1e-2, 1e-1])
    policies: PolicyGrid = Field(default_factory=PolicyGrid)
    output_dir: Optional[str] = None
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])

    @field_validator("lambdas")
    @classmethod
    def lambdas_non_negative(cls, v):
        if any(lam < 0 for lam in v):
            raise ValueError("lambda values must be >= 0")
        return v

    @field_validator("seeds")
    @classmethod
    def seeds_present(cls, v):
        if not v:
            raise ValueError("at least one seed is required")
        return v

    @model_validator(mode="after")
    def check_shapes(self):
        arch = self.architecture
        if arch.input_size is not None and arch.input_size != self.dataset.num_channels:
            raise ValueError(
                f"architecture.input_size={arch.input_size} does not match "
                f"dataset.num_channels={self.dataset.num_channels}"
            )
        return self

    @property
    def layer_sizes(self) -> List[int]:
        """Full size chain [P, hidden..., C * vote_width]"""
        out = self.dataset.num_classes * self.architecture.vote_width
        return [self.dataset.num_channels, *self.architecture.hidden_sizes, out]


def _field_path(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"])


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw mapping, converting pydantic errors into ConfigError"""
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _field_path(first)
        logger.error(f"Invalid config at {path or '<root>'}: {first['msg']}")
        raise ConfigError(first["msg"], path or None) from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate an experiment config JSON file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top-level JSON value must be an object")
    config = parse_config(raw)
    logger.info(f"Loaded config {path} (hash {config_hash(config)[:12]})")
    return config


def config_to_dict(config: BaseModel) -> dict:
    return config.model_dump(mode="json", by_alias=True)


def config_hash(config: BaseModel) -> str:
    """SHA-256 of the canonical JSON dump"""
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
