import os

# Keep test runs from writing log files
os.environ.setdefault("SKIPSNN_LOG_TO_FILE", "false")

import numpy as np
import pytest
from fastapi.testclient import TestClient

from skipsnn.config.schemas import DatasetSpec, ExperimentConfig, LifConfig
from skipsnn.data.spiketrain import generate_dataset
from skipsnn.service.app import create_app
from skipsnn.snn.params import ModelParams, identity_voting, init_params, save_checkpoint


@pytest.fixture
def rng():
    """Seeded generator for property tests"""
    return np.random.default_rng(11)


@pytest.fixture
def tiny_spec() -> DatasetSpec:
    return DatasetSpec(
        num_channels=8,
        horizon=30,
        signal_len=6,
        num_classes=2,
        pattern_rate=0.3,
        noise_spikes_per_step=1,
        seed=3,
    )


@pytest.fixture
def tiny_dataset(tiny_spec):
    """12 train / 6 test samples of the tiny spec"""
    return generate_dataset(tiny_spec, 12, 6)


@pytest.fixture
def tiny_params() -> ModelParams:
    """8 inputs, one hidden layer of 6, 2 outputs, two pulses"""
    return init_params([8, 6, 2], 2, np.random.default_rng(5), pulse_periods=(1, 10))


@pytest.fixture
def tiny_config(tiny_spec) -> ExperimentConfig:
    """Experiment config small enough for end-to-end CLI runs"""
    return ExperimentConfig.model_validate({
        "dataset": tiny_spec.model_dump(),
        "splits": {"train": 12, "test": 6},
        "architecture": {"hidden_sizes": [6], "pulse_periods": [1, 10]},
        "train": {"epochs_stage1": 2, "epochs_stage2": 2, "batch_size": 4, "val_fraction": 0.25},
        "lambdas": [0.0, 0.1],
        "policies": {"fixed_fractions": [0.5], "random_probs": [0.5]},
        "seeds": [0, 1],
    })


@pytest.fixture
def hand_params():
    """
    Factory for the 1-1-1 network: all weights 1, τ=0.5, V_th=1, controller
    reads the hidden neuron with weight w_z and has no pulses.
    """
    def build(w_z: float = 2.0) -> ModelParams:
        return ModelParams(
            layer_weights=[np.ones((1, 1)), np.ones((1, 1))],
            ctrl_wz=np.array([w_z]),
            ctrl_wo=np.zeros(0),
            pulse_periods=(),
            voting=identity_voting(1),
            lif=LifConfig(tau=0.5, v_th=1.0),
        )
    return build


@pytest.fixture
def checkpoint_path(tmp_path, tiny_params):
    return save_checkpoint(tmp_path / "model.npz", tiny_params, {"seed": 5})


@pytest.fixture
def client(checkpoint_path):
    """
    Test client over an inference app backed by the tiny checkpoint.
    """
    with TestClient(create_app(checkpoint_path)) as c:
        yield c


@pytest.fixture
def empty_client(tmp_path):
    """Test client over an app whose checkpoint does not exist"""
    with TestClient(create_app(tmp_path / "missing.npz")) as c:
        yield c
