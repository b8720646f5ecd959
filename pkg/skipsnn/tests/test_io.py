import numpy as np
import pytest

from skipsnn.config.schemas import DatasetSpec
from skipsnn.data.io import format_dataset, parse_dataset, read_dataset, read_dataset_header, write_dataset
from skipsnn.data.spiketrain import SpikeTrain, generate_dataset
from skipsnn.errors import DatasetFormatError


def test_empty_dataset(tmp_path):
    """Test that an empty list writes a zero-count header and reads back empty"""
    path = write_dataset(tmp_path / "empty.ssd", [])
    assert path.read_text(encoding="utf-8") == "SKIPSNN-DATASET v1 P=0 T=0 C=0 N=0\n"
    assert read_dataset(path) == []


def test_all_zero_train_has_no_event_lines():
    """Test the sample block of a silent train"""
    text = format_dataset([SpikeTrain(data=np.zeros((2, 3)), label=0)])
    assert text.splitlines() == ["SKIPSNN-DATASET v1 P=2 T=3 C=1 N=1", "SAMPLE 0 LABEL 0 EVENTS 0"]


def test_label_checked_against_class_count():
    """Test that a label beyond the declared class count is refused on write"""
    trains = [SpikeTrain(data=np.zeros((2, 3)), label=2)]
    with pytest.raises(ValueError, match="out of range"):
        format_dataset(trains, num_classes=2)
    assert format_dataset(trains).splitlines()[0] == "SKIPSNN-DATASET v1 P=2 T=3 C=3 N=1"


def test_round_trip(tmp_path, tiny_spec):
    """Test that read(write(x)) == x"""
    train, _ = generate_dataset(tiny_spec, 10, 0)
    path = write_dataset(tmp_path / "train.ssd", train, num_classes=tiny_spec.num_classes)
    assert read_dataset(path) == train
    assert read_dataset_header(path) == (8, 30, 2, 10)


def test_writes_are_byte_identical(tmp_path, tiny_spec):
    """Test that two writes of the same seeded dataset give the same bytes"""
    train, _ = generate_dataset(tiny_spec, 10, 0)
    a = write_dataset(tmp_path / "a.ssd", train)
    b = write_dataset(tmp_path / "b.ssd", train)
    assert a.read_bytes() == b.read_bytes()


def test_read_missing_file(tmp_path):
    """Test that a missing file raises FileNotFoundError"""
    with pytest.raises(FileNotFoundError):
        read_dataset(tmp_path / "nope.ssd")


@pytest.mark.parametrize(
    "text, line_no",
    [
        ("", 1),
        ("SKIPSNN-DATASET v2 P=2 T=2 C=1 N=0\n", 1),
        ("BOGUS\n", 1),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\n", 2),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0\n", 2),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 1 LABEL 0 EVENTS 0\n", 2),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 1 EVENTS 0\n", 2),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 2\n0 0\n", 4),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 1\n0 x\n", 3),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 1\n2 0\n", 3),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 1\n0 2\n", 3),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 2\n1 0\n0 1\n", 4),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 2\n0 1\n0 1\n", 4),
        ("SKIPSNN-DATASET v1 P=2 T=2 C=1 N=0\nextra\n", 2),
        (b"SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 1\n0 \xff\n", 3),
    ],
)
def test_malformed_files_report_line(text, line_no):
    """Test that every format violation is reported with its line number"""
    with pytest.raises(DatasetFormatError) as exc_info:
        parse_dataset(text)

    # Check the line number is attached and shown
    assert exc_info.value.line_no == line_no
    assert str(exc_info.value).startswith(f"line {line_no}:")


def test_read_undecodable_file_reports_line(tmp_path):
    """Test that a non-UTF-8 byte in a file becomes a DatasetFormatError on its line"""
    path = tmp_path / "bad.ssd"
    path.write_bytes(b"SKIPSNN-DATASET v1 P=2 T=2 C=1 N=1\nSAMPLE 0 LABEL 0 EVENTS 1\n0 \xe9\n")
    with pytest.raises(DatasetFormatError) as exc_info:
        read_dataset(path)
    assert exc_info.value.line_no == 3

    # Check the header reader on a bad first line
    path.write_bytes(b"SKIPSNN-DATASET v1 P=\xff T=2 C=1 N=0\n")
    with pytest.raises(DatasetFormatError) as exc_info:
        read_dataset_header(path)
    assert exc_info.value.line_no == 1


def test_round_trip_over_random_specs(tmp_path, rng):
    """Test read(write(x)) == x across drawn dataset shapes, boundary shapes included"""
    specs = [
        DatasetSpec(num_channels=5, horizon=12, signal_len=4, num_classes=2, noise_spikes_per_step=0, seed=1),
        DatasetSpec(num_channels=4, horizon=7, signal_len=7, num_classes=3, seed=2),
        DatasetSpec(num_channels=6, horizon=9, signal_len=3, num_classes=1, seed=3),
    ]
    for seed in range(10):
        P = int(rng.integers(4, 12))
        T = int(rng.integers(2, 40))
        specs.append(
            DatasetSpec(
                num_channels=P,
                horizon=T,
                signal_len=int(rng.integers(2, T + 1)),
                num_classes=int(rng.integers(1, 5)),
                pattern_rate=float(rng.uniform(0.2, 0.8)),
                noise_spikes_per_step=int(rng.integers(0, P + 1)),
                seed=seed,
            )
        )

    for i, spec in enumerate(specs):
        train, _ = generate_dataset(spec, int(rng.integers(0, 6)), 0)
        path = write_dataset(
            tmp_path / f"spec{i}.ssd", train, spec.num_channels, spec.horizon, spec.num_classes
        )

        # Check equality and the header counts
        assert read_dataset(path) == train
        assert read_dataset_header(path) == (spec.num_channels, spec.horizon, spec.num_classes, len(train))
