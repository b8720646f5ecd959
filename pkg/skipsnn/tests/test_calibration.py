import numpy as np
import pytest

from skipsnn.cli.commands import build_params
from skipsnn.config.schemas import DatasetSpec, SurrogateConfig
from skipsnn.data.spiketrain import generate_dataset, labels_of, stack_trains
from skipsnn.snn.calibration import calibrate_layer_scales, peak_potentials
from skipsnn.snn.forward import GateMode, skipsnn_forward
from skipsnn.snn.params import init_params
from skipsnn.training.bptt import bptt, surrogate_pair


def _sparse_batch(seed: int, n: int = 24):
    spec = DatasetSpec(
        num_channels=16, horizon=40, signal_len=10, num_classes=2,
        pattern_rate=0.3, noise_spikes_per_step=1, seed=seed,
    )
    train, _ = generate_dataset(spec, n, 0)
    return stack_trains(train), labels_of(train)


def test_first_layer_median_peak_lands_on_threshold():
    """Test that calibration puts the median first-layer peak at V_th"""
    X, _ = _sparse_batch(0)
    params = init_params([16, 32, 16, 2], 2, np.random.default_rng(0), pulse_periods=(1, 10))
    calibrated = calibrate_layer_scales(params, X, quantile=0.5, tol=0.05, max_iter=10)

    median = np.quantile(peak_potentials(X, calibrated, 0), 0.5)
    assert median == pytest.approx(params.lif.v_th, rel=0.06)

    # Check the input params were left alone
    assert not np.array_equal(params.layer_weights[0], calibrated.layer_weights[0])
    assert np.array_equal(params.ctrl_wo, calibrated.ctrl_wo)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_calibration_wakes_a_silent_network(seed):
    """Test that a network too weak to spike gets output spikes and stage-1 gradients"""
    X, y = _sparse_batch(seed)
    params = init_params(
        [16, 32, 16, 2], 2, np.random.default_rng(seed), pulse_periods=(1, 10), init_gain=0.05,
    )
    pair = surrogate_pair(SurrogateConfig(), SurrogateConfig(), params.lif.v_th)

    # Check the raw draw never reaches threshold
    raw = skipsnn_forward(X, params, GateMode.FORCED_AWAKE)
    assert not raw.z[0].any()
    assert not raw.outputs.any()

    calibrated = calibrate_layer_scales(params, X)
    trace = skipsnn_forward(X, calibrated, GateMode.FORCED_AWAKE)
    assert trace.outputs.mean() > 0.0

    _, grads = bptt(trace, y, calibrated, pair)
    assert np.linalg.norm(grads.layer_weights[0]) > 0.0
    assert np.linalg.norm(grads.layer_weights[-1]) > 0.0


def test_silent_input_keeps_weights():
    """Test that an all-zero calibration batch leaves every layer unscaled"""
    params = init_params([4, 5, 2], 2, np.random.default_rng(3), pulse_periods=(1,))
    calibrated = calibrate_layer_scales(params, np.zeros((3, 4, 12)))
    for before, after in zip(params.layer_weights, calibrated.layer_weights):
        assert np.array_equal(before, after)
    assert calibrated is not params


def test_calibration_argument_checks(tiny_params):
    with pytest.raises(ValueError):
        calibrate_layer_scales(tiny_params, np.ones((8, 5)), quantile=1.0)
    with pytest.raises(IndexError):
        peak_potentials(np.ones((8, 5)), tiny_params, 2)


def test_build_params_calibrates_only_when_enabled(tiny_config, tiny_dataset):
    """Test the config switch between raw and calibrated initialization"""
    train, _ = tiny_dataset
    raw = build_params(tiny_config, 0)
    calibrated = build_params(tiny_config, 0, train)

    # Check same seed, same draw before scaling
    for a, b in zip(raw.layer_weights, calibrated.layer_weights):
        ratio = b / a
        np.testing.assert_allclose(ratio, ratio.flat[0])

    arch = tiny_config.architecture.model_copy(update={"calibration_quantile": None})
    off = tiny_config.model_copy(update={"architecture": arch})
    for a, b in zip(raw.layer_weights, build_params(off, 0, train).layer_weights):
        assert np.array_equal(a, b)
