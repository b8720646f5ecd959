"""
Model parameters (synaptic weights, controller weights, pulse periods, voting
matrix), initialization and checkpoint files.
"""
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from skipsnn.config.schemas import LifConfig
from skipsnn.errors import CheckpointError, ShapeMismatchError
from skipsnn.logs.logger import logger

CHECKPOINT_FORMAT = "skipsnn-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class ModelParams:
    """
    layer_weights[0] maps the input (P) to the first hidden layer; layer_weights[j]
    has shape (s_{j+1}, s_j). The controller reads the first hidden layer.
    """
    layer_weights: List[np.ndarray]
    ctrl_wz: np.ndarray
    ctrl_wo: np.ndarray
    pulse_periods: Tuple[int, ...]
    voting: np.ndarray
    lif: LifConfig = field(default_factory=LifConfig)

    def __post_init__(self):
        self.layer_weights = [np.asarray(w, dtype=np.float64) for w in self.layer_weights]
        self.ctrl_wz = np.asarray(self.ctrl_wz, dtype=np.float64).reshape(-1)
        self.ctrl_wo = np.asarray(self.ctrl_wo, dtype=np.float64).reshape(-1)
        self.pulse_periods = tuple(int(p) for p in self.pulse_periods)
        self.voting = np.asarray(self.voting, dtype=np.float64)
        self.validate()

    def validate(self) -> None:
        if not self.layer_weights:
            raise ShapeMismatchError("at least one weight matrix is required")
        for j, w in enumerate(self.layer_weights):
            if w.ndim != 2:
                raise ShapeMismatchError(f"layer_weights[{j}] must be 2-D, got {w.shape}")
            if j > 0 and w.shape[1] != self.layer_weights[j - 1].shape[0]:
                raise ShapeMismatchError(
                    f"layer_weights[{j}] has {w.shape[1]} columns, "
                    f"previous layer has {self.layer_weights[j - 1].shape[0]} neurons"
                )
        if self.ctrl_wz.shape != (self.first_hidden_size,):
            raise ShapeMismatchError(f"ctrl_wz length {self.ctrl_wz.size} != first hidden size {self.first_hidden_size}")
        if self.ctrl_wo.shape != (len(self.pulse_periods),):
            raise ShapeMismatchError(f"ctrl_wo length {self.ctrl_wo.size} != number of pulses {len(self.pulse_periods)}")
        if any(p < 1 for p in self.pulse_periods):
            raise ShapeMismatchError("pulse periods must be >= 1")
        if self.voting.ndim != 2 or self.voting.shape[1] != self.output_size:
            raise ShapeMismatchError(f"voting matrix shape {self.voting.shape} incompatible with output size {self.output_size}")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.layer_weights[0].shape[1]] + [w.shape[0] for w in self.layer_weights]

    @property
    def input_size(self) -> int:
        return self.layer_weights[0].shape[1]

    @property
    def first_hidden_size(self) -> int:
        return self.layer_weights[0].shape[0]

    @property
    def output_size(self) -> int:
        return self.layer_weights[-1].shape[0]

    @property
    def num_classes(self) -> int:
        return self.voting.shape[0]

    def copy(self) -> "ModelParams":
        return replace(
            self,
            layer_weights=[w.copy() for w in self.layer_weights],
            ctrl_wz=self.ctrl_wz.copy(),
            ctrl_wo=self.ctrl_wo.copy(),
            voting=self.voting.copy(),
        )

    def with_lif(self, lif: LifConfig) -> "ModelParams":
        return replace(self.copy(), lif=lif)


def identity_voting(num_classes: int, vote_width: int = 1) -> np.ndarray:
    """Each class averages its own block of `vote_width` output neurons"""
    return np.kron(np.eye(num_classes), np.full((1, vote_width), 1.0 / vote_width))


def init_params(
    layer_sizes: Sequence[int],
    num_classes: int,
    rng: np.random.Generator,
    lif: LifConfig = LifConfig(),
    pulse_periods: Sequence[int] = (1, 10, 100),
    vote_width: int = 1,
    ctrl_init: float = 0.1,
    init_gain: float = 1.0,
    pulse_gain: float = 1.2,
) -> ModelParams:
    """
    Glorot-uniform layer weights (bound times `init_gain`), W_z filled with
    `ctrl_init` and identity-per-class voting.

    Each pulse weight is `pulse_gain * V_th`: above 1 a pulse alone makes the
    controller spike, so with a period-1 pulse a fresh network is awake at every
    step and stage 2 has to learn to hibernate.
    """
    if len(layer_sizes) < 3:
        raise ShapeMismatchError("need input, at least one hidden layer and an output layer")
    if layer_sizes[-1] != num_classes * vote_width:
        raise ShapeMismatchError(f"output size {layer_sizes[-1]} != num_classes * vote_width = {num_classes * vote_width}")

    weights = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = init_gain * np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))

    params = ModelParams(
        layer_weights=weights,
        ctrl_wz=np.full(layer_sizes[1], ctrl_init),
        ctrl_wo=np.full(len(pulse_periods), pulse_gain * lif.v_th),
        pulse_periods=tuple(pulse_periods),
        voting=identity_voting(num_classes, vote_width),
        lif=lif,
    )
    logger.debug(f"Initialized params for layer sizes {list(layer_sizes)}")
    return params


def save_checkpoint(path: Union[str, Path], params: ModelParams, metadata: dict = None) -> Path:
    """Write params as .npz with a JSON header recording format version and shapes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layer_sizes": params.layer_sizes,
        "num_classes": params.num_classes,
        "pulse_periods": list(params.pulse_periods),
        "lif": params.lif.model_dump(),
        "metadata": metadata or {},
    }
    arrays = {f"W{j}": w for j, w in enumerate(params.layer_weights)}
    with open(path, "wb") as fh:
        np.savez(
            fh,
            header=np.array(json.dumps(header, sort_keys=True)),
            ctrl_wz=params.ctrl_wz,
            ctrl_wo=params.ctrl_wo,
            voting=params.voting,
            **arrays,
        )
    logger.info(f"Checkpoint saved to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[ModelParams, dict]:
    """Read a checkpoint written by `save_checkpoint`; returns (params, metadata)"""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            header = json.loads(str(archive["header"]))
            if header.get("format") != CHECKPOINT_FORMAT:
                raise CheckpointError(f"{path} is not a SkipSNN checkpoint")
            if header.get("version") != CHECKPOINT_VERSION:
                raise CheckpointError(f"unsupported checkpoint version {header.get('version')}")
            n_layers = len(header["layer_sizes"]) - 1
            params = ModelParams(
                layer_weights=[archive[f"W{j}"] for j in range(n_layers)],
                ctrl_wz=archive["ctrl_wz"],
                ctrl_wo=archive["ctrl_wo"],
                pulse_periods=tuple(header["pulse_periods"]),
                voting=archive["voting"],
                lif=LifConfig(**header["lif"]),
            )
    except (KeyError, ValueError, OSError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc

    if params.layer_sizes != header["layer_sizes"]:
        raise CheckpointError(f"checkpoint shapes {params.layer_sizes} disagree with header {header['layer_sizes']}")
    return params, header.get("metadata", {})
