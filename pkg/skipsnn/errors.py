"""
Exception hierarchy for the SkipSNN engine.
Every error also derives from the closest builtin so generic handlers keep working.
"""
from typing import Optional


class SkipSNNError(Exception):
    """Base class for all engine errors"""


class ShapeMismatchError(SkipSNNError, ValueError):
    """Array shapes do not chain (weights, states, inputs or masks)"""


class DegeneratePatternError(SkipSNNError, ValueError):
    """Class templates keep colliding, the pattern space is too small"""


class DatasetFormatError(SkipSNNError, ValueError):
    """Malformed sparse-event dataset file"""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ConfigError(SkipSNNError, ValueError):
    """Invalid experiment configuration"""

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class CheckpointError(SkipSNNError, ValueError):
    """Unreadable or incompatible checkpoint file"""


class NonFiniteLossError(SkipSNNError, ArithmeticError):
    """A loss evaluation produced NaN or infinity"""


class TrainingDivergedError(SkipSNNError, ArithmeticError):
    """Training loss became non-finite"""

    def __init__(self, stage: int, epoch: int, last_finite_loss: Optional[float]):
        self.stage = stage
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss
        super().__init__(
            f"training diverged in stage {stage} at epoch {epoch} "
            f"(last finite loss: {last_finite_loss})"
        )


class MetricsError(SkipSNNError, ValueError):
    """Undefined metric (empty input or length mismatch)"""
