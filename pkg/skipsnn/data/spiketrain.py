"""
Spike-train data model and the synthetic temporally-sparse dataset generator.

A class pattern (P x S binary template) is embedded at a random offset of an
otherwise blank P x T train; then k distinct channels receive a noise spike at
every timestep, OR-ed onto whatever is already there.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from skipsnn.config.schemas import DatasetSpec
from skipsnn.errors import DegeneratePatternError, ShapeMismatchError
from skipsnn.logs.logger import logger

MAX_PATTERN_REDRAWS = 100

# Split identifiers mixed into per-sample seeds
SPLIT_CODES = {"train": 0, "test": 1}


@dataclass(frozen=True)
class SpikeTrain:
    """
    Binary P x T event matrix plus class label.

    A train does not know the class count, so only label >= 0 is checked here;
    label < C is enforced where C is known: by `format_dataset` on write and by
    the parser on read.
    """
    data: np.ndarray
    label: int
    # Column where the class pattern starts; None when unknown (e.g. read from file)
    offset: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeMismatchError(f"spike train must be a non-empty P x T matrix, got {data.shape}")
        if not np.isin(data, (0, 1)).all():
            raise ValueError("spike train entries must be 0 or 1")
        if self.label < 0:
            raise ValueError(f"label must be non-negative, got {self.label}")
        data = data.astype(np.uint8, copy=True)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "label", int(self.label))

    @property
    def num_channels(self) -> int:
        return self.data.shape[0]

    @property
    def horizon(self) -> int:
        return self.data.shape[1]

    def events(self) -> np.ndarray:
        """(t, channel) pairs sorted by t then channel"""
        channels, times = np.nonzero(self.data)
        order = np.lexsort((channels, times))
        return np.stack([times[order], channels[order]], axis=1)

    def __eq__(self, other):
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.label, self.data.tobytes()))


@dataclass(frozen=True)
class ClassPattern:
    """Fixed P x S template carrying the class information"""
    template: np.ndarray
    label: int

    def __post_init__(self):
        template = np.asarray(self.template, dtype=np.uint8).copy()
        template.setflags(write=False)
        object.__setattr__(self, "template", template)


def make_class_patterns(spec: DatasetSpec, rng: np.random.Generator) -> List[ClassPattern]:
    """
    Draw one Bernoulli(pattern_rate) template per class.
    Collisions with earlier classes are redrawn; 100 failed redraws raise DegeneratePatternError.
    """
    shape = (spec.num_channels, spec.signal_len)
    patterns: List[ClassPattern] = []
    for label in range(spec.num_classes):
        for _ in range(MAX_PATTERN_REDRAWS + 1):
            template = (rng.random(shape) < spec.pattern_rate).astype(np.uint8)
            if not any(np.array_equal(template, p.template) for p in patterns):
                break
        else:
            logger.error(
                f"Pattern collision for class {label} after {MAX_PATTERN_REDRAWS} redraws "
                f"(P={spec.num_channels}, S={spec.signal_len}, r={spec.pattern_rate})"
            )
            raise DegeneratePatternError("degenerate pattern space")
        patterns.append(ClassPattern(template=template, label=label))
    return patterns


def embed_with_noise(
    pattern: ClassPattern,
    spec: DatasetSpec,
    rng: np.random.Generator,
    offset: Optional[int] = None,
) -> SpikeTrain:
    """Place the template at a uniform offset of a blank train and add per-step noise"""
    P, T, S, k = spec.num_channels, spec.horizon, spec.signal_len, spec.noise_spikes_per_step
    if pattern.template.shape != (P, S):
        raise ShapeMismatchError(f"template shape {pattern.template.shape} != ({P}, {S})")

    if offset is None:
        offset = int(rng.integers(0, T - S + 1))
    elif not 0 <= offset <= T - S:
        raise ValueError(f"offset {offset} outside [0, {T - S}]")

    data = np.zeros((P, T), dtype=np.uint8)
    data[:, offset:offset + S] = pattern.template

    if k > 0:
        # k distinct uniformly chosen channels per column
        noise_channels = np.argsort(rng.random((T, P)), axis=1)[:, :k]
        data[noise_channels.T, np.arange(T)[None, :]] = 1

    return SpikeTrain(data=data, label=pattern.label, offset=offset)


def sample_rng(spec: DatasetSpec, split: str, index: int) -> np.random.Generator:
    """Per-sample generator derived from (dataset seed, split, sample index)"""
    return np.random.default_rng([spec.seed, SPLIT_CODES[split], index])


def pattern_rng(spec: DatasetSpec) -> np.random.Generator:
    return np.random.default_rng([spec.seed, 2**16])


def generate_split(
    spec: DatasetSpec,
    size: int,
    split: str = "train",
    patterns: Optional[Sequence[ClassPattern]] = None,
    workers: int = 1,
) -> List[SpikeTrain]:
    """
    Generate `size` samples with balanced labels (index mod C).
    Output is a pure function of (spec, split, size) regardless of `workers`.
    """
    if split not in SPLIT_CODES:
        raise ValueError(f"unknown split '{split}'")
    if patterns is None:
        patterns = make_class_patterns(spec, pattern_rng(spec))

    def build(index: int) -> SpikeTrain:
        pattern = patterns[index % spec.num_classes]
        return embed_with_noise(pattern, spec, sample_rng(spec, split, index))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trains = list(pool.map(build, range(size)))
    else:
        trains = [build(i) for i in range(size)]

    logger.debug(f"Generated {size} {split} samples (P={spec.num_channels}, T={spec.horizon})")
    return trains


def generate_dataset(spec: DatasetSpec, num_train: int, num_test: int, workers: int = 1):
    """Train and test splits sharing the same class templates"""
    patterns = make_class_patterns(spec, pattern_rng(spec))
    train = generate_split(spec, num_train, "train", patterns, workers)
    test = generate_split(spec, num_test, "test", patterns, workers)
    logger.info(
        f"Dataset ready: {num_train} train / {num_test} test, "
        f"useful fraction {spec.useful_fraction:.3f}"
    )
    return train, test


def stack_trains(trains: Sequence[SpikeTrain]) -> np.ndarray:
    """Stack trains into a (B, P, T) float64 batch"""
    if not trains:
        raise ShapeMismatchError("cannot stack an empty list of spike trains")
    shapes = {t.data.shape for t in trains}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"spike trains have differing shapes: {sorted(shapes)}")
    return np.stack([t.data for t in trains]).astype(np.float64)


def labels_of(trains: Sequence[SpikeTrain]) -> np.ndarray:
    return np.array([t.label for t in trains], dtype=np.int64)
