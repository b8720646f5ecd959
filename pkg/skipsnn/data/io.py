"""
Sparse-event dataset file format (UTF-8 text).

    SKIPSNN-DATASET v1 P=<int> T=<int> C=<int> N=<int>
    SAMPLE <index> LABEL <class> EVENTS <count>
    <t> <channel>            (count lines, ascending by t then channel)
"""
import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from skipsnn.data.spiketrain import SpikeTrain
from skipsnn.errors import DatasetFormatError, ShapeMismatchError
from skipsnn.logs.logger import logger

MAGIC = "SKIPSNN-DATASET"
FORMAT_VERSION = "v1"

HEADER_RE = re.compile(rf"^{MAGIC} (v\d+) P=(\d+) T=(\d+) C=(\d+) N=(\d+)$")
SAMPLE_RE = re.compile(r"^SAMPLE (\d+) LABEL (\d+) EVENTS (\d+)$")
EVENT_RE = re.compile(r"^(\d+) (\d+)$")


def format_dataset(
    trains: Sequence[SpikeTrain],
    num_channels: Optional[int] = None,
    horizon: Optional[int] = None,
    num_classes: Optional[int] = None,
) -> str:
    """Serialize trains to the text format; dimensions default to those of the data"""
    if trains:
        shapes = {t.data.shape for t in trains}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"trains have differing shapes: {sorted(shapes)}")
        P, T = shapes.pop()
        if (num_channels is not None and num_channels != P) or (horizon is not None and horizon != T):
            raise ShapeMismatchError(f"declared P/T ({num_channels}/{horizon}) != data ({P}/{T})")
        max_label = max(t.label for t in trains)
        C = num_classes if num_classes is not None else max_label + 1
        if max_label >= C:
            raise ValueError(f"label {max_label} out of range for C={C}")
    else:
        P, T, C = num_channels or 0, horizon or 0, num_classes or 0

    lines = [f"{MAGIC} {FORMAT_VERSION} P={P} T={T} C={C} N={len(trains)}"]
    for index, train in enumerate(trains):
        events = train.events()
        lines.append(f"SAMPLE {index} LABEL {train.label} EVENTS {len(events)}")
        lines.extend(f"{t} {ch}" for t, ch in events)
    return "\n".join(lines) + "\n"


def write_dataset(
    path: Union[str, Path],
    trains: Sequence[SpikeTrain],
    num_channels: Optional[int] = None,
    horizon: Optional[int] = None,
    num_classes: Optional[int] = None,
) -> Path:
    """Write trains to `path`; the output is byte-identical for identical input"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = format_dataset(trains, num_channels, horizon, num_classes)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    logger.info(f"Wrote {len(trains)} samples to {path}")
    return path


def read_dataset_header(path: Union[str, Path]) -> Tuple[int, int, int, int]:
    """(P, T, C, N) from the first line"""
    with open(path, "rb") as fh:
        return _parse_header(decode_dataset(fh.readline()).rstrip("\n"))


def _parse_header(line: str) -> Tuple[int, int, int, int]:
    match = HEADER_RE.match(line)
    if not match:
        raise DatasetFormatError(f"malformed header: {line!r}", 1)
    version, P, T, C, N = match.group(1), *map(int, match.groups()[1:])
    if version != FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported format version {version}", 1)
    if N > 0 and (P < 1 or T < 1 or C < 1):
        raise DatasetFormatError("P, T and C must be positive for a non-empty dataset", 1)
    return P, T, C, N


def decode_dataset(raw: bytes) -> str:
    """UTF-8 decode; undecodable bytes are reported on the line they sit on"""
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_no = raw.count(b"\n", 0, exc.start) + 1
        raise DatasetFormatError(f"invalid UTF-8 byte {raw[exc.start:exc.start + 1]!r}", line_no) from exc


def parse_dataset(text: Union[str, bytes]) -> List[SpikeTrain]:
    """Parse the text format, rejecting anything not written by `format_dataset`"""
    if isinstance(text, bytes):
        text = decode_dataset(text)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetFormatError("empty file (missing header)", 1)

    P, T, C, N = _parse_header(lines[0])
    trains: List[SpikeTrain] = []
    pos = 1

    for expected_index in range(N):
        line_no = pos + 1
        if pos >= len(lines):
            raise DatasetFormatError(f"truncated file: expected {N} samples, found {expected_index}", line_no)
        match = SAMPLE_RE.match(lines[pos])
        if not match:
            raise DatasetFormatError(f"malformed sample header: {lines[pos]!r}", line_no)
        index, label, count = map(int, match.groups())
        if index != expected_index:
            raise DatasetFormatError(f"sample index {index} out of sequence (expected {expected_index})", line_no)
        if label >= C:
            raise DatasetFormatError(f"label {label} out of range for C={C}", line_no)
        pos += 1

        data = np.zeros((P, T), dtype=np.uint8)
        previous = (-1, -1)
        for _ in range(count):
            line_no = pos + 1
            if pos >= len(lines):
                raise DatasetFormatError(f"truncated file inside sample {index}", line_no)
            event = EVENT_RE.match(lines[pos])
            if not event:
                raise DatasetFormatError(f"malformed event line: {lines[pos]!r}", line_no)
            t, ch = map(int, event.groups())
            if t >= T or ch >= P:
                raise DatasetFormatError(f"event ({t}, {ch}) out of range for P={P}, T={T}", line_no)
            if (t, ch) <= previous:
                raise DatasetFormatError(f"events not strictly ascending at ({t}, {ch})", line_no)
            previous = (t, ch)
            data[ch, t] = 1
            pos += 1
        trains.append(SpikeTrain(data=data, label=label))

    if pos < len(lines):
        raise DatasetFormatError(f"unexpected trailing content: {lines[pos]!r}", pos + 1)
    return trains


def read_dataset(path: Union[str, Path]) -> List[SpikeTrain]:
    """Read a dataset file written by `write_dataset`"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    trains = parse_dataset(path.read_bytes())
    logger.info(f"Read {len(trains)} samples from {path}")
    return trains
