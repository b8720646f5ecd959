"""
Exit-code mapping for the command line, one entry per error family.
"""
import traceback

from skipsnn.errors import (
    CheckpointError,
    ConfigError,
    DatasetFormatError,
    DegeneratePatternError,
    NonFiniteLossError,
    ShapeMismatchError,
    TrainingDivergedError,
)
from skipsnn.logs.logger import logger

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SHAPE = 4
EXIT_TRAINING = 5

# Checked in order; the first matching class wins
ERROR_EXIT_CODES = [
    (ConfigError, EXIT_CONFIG, "Configuration error"),
    (DatasetFormatError, EXIT_DATA, "Dataset error"),
    (DegeneratePatternError, EXIT_DATA, "Dataset error"),
    (CheckpointError, EXIT_DATA, "Checkpoint error"),
    (FileNotFoundError, EXIT_DATA, "Missing file"),
    (ShapeMismatchError, EXIT_SHAPE, "Shape mismatch"),
    (TrainingDivergedError, EXIT_TRAINING, "Training diverged"),
    (NonFiniteLossError, EXIT_TRAINING, "Training diverged"),
]


def handle_cli_error(exc: BaseException) -> int:
    """
    Log an exception raised by a subcommand and return the process exit code.
    Unknown exceptions are logged with their full traceback.
    """
    for error_type, code, label in ERROR_EXIT_CODES:
        if isinstance(exc, error_type):
            logger.error(f"{label}: {exc}")
            return code

    logger.error(f"Unhandled exception: {exc}")
    logger.error("".join(traceback.format_exception(type(exc), exc, exc.__traceback__)))
    return EXIT_OTHER
