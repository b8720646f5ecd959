"""
Classification and gating metrics, plus mean ± std aggregation over seeds.
"""
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from skipsnn.errors import MetricsError


def accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.size == 0:
        raise MetricsError("accuracy of an empty prediction set is undefined")
    if predictions.shape != labels.shape:
        raise MetricsError(f"{predictions.size} predictions for {labels.size} labels")
    return float(np.mean(predictions == labels))


def awake_fraction(masks) -> float:
    """
    Mean applied-gate value over every timestep of every sample.
    Accepts a (B, T) array, a single (T,) mask, or a list of per-sample masks.
    """
    if isinstance(masks, np.ndarray):
        rows = [masks] if masks.ndim == 1 else list(masks)
    else:
        rows = [np.asarray(m, dtype=np.float64) for m in masks]
    if not rows or any(r.size == 0 for r in rows):
        raise MetricsError("awake fraction of an empty mask set is undefined")
    return float(np.mean([r.mean() for r in rows]))


def attention_localization(masks: np.ndarray, offsets: Sequence[int], signal_len: int) -> float:
    """
    Share of awake timesteps that fall inside each sample's signal window
    [offset, offset + signal_len), pooled over the batch.
    """
    masks = np.atleast_2d(np.asarray(masks, dtype=np.float64))
    offsets = np.asarray(offsets, dtype=np.int64)
    if masks.shape[0] != offsets.size:
        raise MetricsError(f"{masks.shape[0]} masks for {offsets.size} offsets")
    steps = np.arange(masks.shape[1])
    inside = (steps[None, :] >= offsets[:, None]) & (steps[None, :] < offsets[:, None] + signal_len)
    total = masks.sum()
    if total == 0:
        raise MetricsError("no awake timesteps to localize")
    return float((masks * inside).sum() / total)


def mean_std(values: Iterable[float]) -> Dict[str, float]:
    """Population mean and standard deviation; std is 0 for a single value"""
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise MetricsError("cannot aggregate an empty set of runs")
    return {"mean": float(values.mean()), "std": float(values.std())}


def aggregate_runs(rows: Sequence[dict], keys: Sequence[str], fields: Optional[Sequence[str]] = None) -> Dict[tuple, dict]:
    """
    Group per-seed result rows by `keys` and reduce every other numeric field
    to mean/std. Group order follows first appearance.
    """
    groups: Dict[tuple, list] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(row)
    out = {}
    for key, members in groups.items():
        names = fields or [f for f in members[0] if f not in keys and f != "seed"]
        out[key] = {name: mean_std(m[name] for m in members) for name in names}
        out[key]["runs"] = len(members)
    return out
