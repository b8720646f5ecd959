import numpy as np
import pytest

from skipsnn.errors import MetricsError
from skipsnn.metrics.classification import (
    accuracy,
    aggregate_runs,
    attention_localization,
    awake_fraction,
    mean_std,
)


def test_accuracy():
    assert accuracy([0, 1, 2], [0, 1, 2]) == 1.0
    assert accuracy([0, 1, 1, 0], [0, 1, 2, 3]) == 0.5


def test_accuracy_errors():
    """Test empty and mismatched inputs"""
    with pytest.raises(MetricsError):
        accuracy([], [])
    with pytest.raises(MetricsError):
        accuracy([0, 1], [0])


def test_awake_fraction_inputs():
    """Test array, single-mask and list forms"""
    assert awake_fraction(np.ones((3, 10))) == 1.0
    assert awake_fraction(np.array([1, 0, 0, 0])) == 0.25
    assert awake_fraction([[1, 1], [0, 0, 0, 1]]) == pytest.approx(0.625)
    with pytest.raises(MetricsError):
        awake_fraction([])


def test_attention_localization():
    """Test the share of awake steps falling inside the signal window"""
    masks = np.array([
        [0, 1, 1, 0, 0, 1],
        [1, 0, 0, 0, 1, 1],
    ], dtype=float)
    # window [1, 3) for the first, [4, 6) for the second: 2 + 2 of 6 awake steps
    assert attention_localization(masks, [1, 4], 2) == pytest.approx(4 / 6)


def test_attention_localization_errors():
    with pytest.raises(MetricsError):
        attention_localization(np.ones((2, 5)), [0], 2)
    with pytest.raises(MetricsError):
        attention_localization(np.zeros((1, 5)), [0], 2)


def test_mean_std():
    assert mean_std([2.0]) == {"mean": 2.0, "std": 0.0}
    stats = mean_std([1.0, 3.0])
    assert stats == {"mean": 2.0, "std": 1.0}
    with pytest.raises(MetricsError):
        mean_std([])


def test_aggregate_runs():
    """Test grouping per-seed rows by key"""
    rows = [
        {"lambda": 0.1, "seed": 0, "accuracy": 0.8, "awake_frac": 0.2},
        {"lambda": 0.01, "seed": 0, "accuracy": 0.9, "awake_frac": 0.5},
        {"lambda": 0.1, "seed": 1, "accuracy": 0.6, "awake_frac": 0.4},
    ]
    summary = aggregate_runs(rows, ["lambda"])

    assert list(summary) == [(0.1,), (0.01,)]
    assert summary[(0.1,)]["runs"] == 2
    assert summary[(0.1,)]["accuracy"]["mean"] == pytest.approx(0.7)
    assert summary[(0.1,)]["awake_frac"]["std"] == pytest.approx(0.1)
    assert "seed" not in summary[(0.1,)]
    assert summary[(0.01,)]["accuracy"] == {"mean": 0.9, "std": 0.0}
