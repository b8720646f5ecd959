import numpy as np
import pytest

from skipsnn.config.schemas import LifConfig
from skipsnn.errors import ShapeMismatchError
from skipsnn.snn.neurons import (
    ControllerState,
    LayerState,
    controller_step,
    heaviside,
    lif_layer_step,
    logistic_spike,
    pulse_vector,
)
from skipsnn.snn.params import ModelParams, identity_voting


@pytest.mark.parametrize("x, expected", [(-0.5, 0.0), (0.0, 1.0), (3.2, 1.0)])
def test_heaviside(x, expected):
    """Test the step function, including Θ(0) = 1"""
    assert heaviside(x) == expected


def test_heaviside_array():
    """Test elementwise evaluation"""
    assert heaviside(np.array([-1.0, 0.0, 2.0])).tolist() == [0.0, 1.0, 1.0]


def test_lif_hand_trace():
    """Test the one-neuron trajectory for currents [1, 0, 1]"""
    cfg = LifConfig(tau=0.5, v_th=1.0)
    state = LayerState.zeros(1)
    us, zs = [], []
    for current in [1.0, 0.0, 1.0]:
        state = lif_layer_step(state, np.array([current]), cfg)
        us.append(state.u[0])
        zs.append(state.z[0])
    assert us == [1.0, 0.0, 1.0]
    assert zs == [1.0, 0.0, 1.0]


def test_lif_memoryless_when_tau_zero():
    """Test that τ = 0 makes u equal the input current"""
    cfg = LifConfig(tau=0.0, v_th=1.0)
    state = LayerState(u=np.array([0.7, -0.3]), z=np.zeros(2))
    current = np.array([0.4, 0.2])
    assert np.array_equal(lif_layer_step(state, current, cfg).u, current)


def test_lif_leaky_integration_without_spikes():
    """Test pure leaky integration when the threshold is never reached"""
    cfg = LifConfig(tau=0.5, v_th=1e9)
    state = LayerState.zeros(1)
    expected = 0.0
    for c in [1.0, 2.0, 0.5, 0.0]:
        state = lif_layer_step(state, np.array([c]), cfg)
        expected = 0.5 * expected + c
        assert state.u[0] == expected
        assert state.z[0] == 0.0


def test_lif_shape_mismatch():
    """Test that a wrong-length current is rejected"""
    with pytest.raises(ShapeMismatchError):
        lif_layer_step(LayerState.zeros(3), np.ones(2), LifConfig())


@pytest.mark.parametrize(
    "t, periods, expected",
    [(5, [1], [1.0]), (0, [1, 10, 100], [1.0, 1.0, 1.0]), (30, [1, 10, 100], [1.0, 1.0, 0.0])],
)
def test_pulse_vector(t, periods, expected):
    """Test that pulse i fires iff t is a multiple of its period"""
    assert pulse_vector(t, periods).tolist() == expected


def test_pulse_vector_negative_time():
    """Test that negative timesteps are rejected"""
    with pytest.raises(ValueError):
        pulse_vector(-1, [1])


def _controller_params(wz, wo, periods):
    hidden = len(wz)
    return ModelParams(
        layer_weights=[np.ones((hidden, 1)), np.ones((1, hidden))],
        ctrl_wz=np.array(wz, dtype=float),
        ctrl_wo=np.array(wo, dtype=float),
        pulse_periods=periods,
        voting=identity_voting(1),
        lif=LifConfig(tau=0.5, v_th=1.0),
    )


def test_controller_zero_weights_stay_silent():
    """Test that zero drive keeps v = 0 below threshold"""
    params = _controller_params([0.0], [0.0], (1,))
    state = controller_step(ControllerState(v=np.array(0.0), a=np.array(0.0)), np.array([1.0]), np.array([1.0]), params)
    assert state.v == 0.0
    assert state.a == 0.0


def test_controller_resets_after_gate_spike():
    """Test that a previous gate spike removes the decay term"""
    params = _controller_params([0.0], [0.0], (1,))
    state = controller_step(ControllerState(v=np.array(5.0), a=np.array(1.0)), np.array([0.0]), np.array([0.0]), params)
    assert state.v == 0.0


def test_controller_hand_check():
    """Test v = 0.2 + 1.0 + 0.3 = 1.5 and a spike"""
    params = _controller_params([0.5, 0.5], [0.3], (1,))
    state = controller_step(
        ControllerState(v=np.array(0.4), a=np.array(0.0)), np.array([1.0, 1.0]), np.array([1.0]), params
    )
    assert state.v == pytest.approx(1.5)
    assert state.a == 1.0


def test_controller_shape_mismatch():
    """Test that a z2 of the wrong length is rejected"""
    params = _controller_params([0.5, 0.5], [0.3], (1,))
    with pytest.raises(ShapeMismatchError):
        controller_step(ControllerState.initial(), np.ones(3), np.ones(1), params)


def test_logistic_spike_is_smooth_step():
    """Test the proxy spike function's midpoint and limits"""
    spike = logistic_spike(0.5)
    assert spike(np.array(0.0)) == pytest.approx(0.5)
    assert spike(np.array(50.0)) == pytest.approx(1.0)
    assert spike(np.array(-50.0)) == pytest.approx(0.0, abs=1e-12)
