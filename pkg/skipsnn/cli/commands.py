"""
Implementations behind the command-line subcommands.

Each command writes its outputs plus a manifest into one directory and returns
the paths it wrote. CSV rows are formatted with fixed precision so identical
configs and seeds give byte-identical files.
"""
import csv
import json
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from skipsnn.baselines.policies import (
    evaluate_gate_mode,
    evaluate_policy,
    fixed_factory,
    random_factory,
)
from skipsnn.config.schemas import ExperimentConfig, config_hash
from skipsnn.data.io import read_dataset, write_dataset
from skipsnn.data.spiketrain import SpikeTrain, generate_dataset, labels_of, stack_trains
from skipsnn.errors import ConfigError, ShapeMismatchError
from skipsnn.logs.logger import audit_log, logger
from skipsnn.metrics.classification import aggregate_runs, attention_localization
from skipsnn.metrics.ledger import FlopLedger, total_mflops
from skipsnn.snn.calibration import calibrate_layer_scales
from skipsnn.snn.forward import GateMode, skipsnn_forward
from skipsnn.snn.params import ModelParams, init_params, load_checkpoint, save_checkpoint
from skipsnn.training.trainer import evaluate, train_two_stage, write_epoch_log
from skipsnn.cli.manifest import build_manifest, write_manifest

PathLike = Union[str, Path]

SWEEP_RUN_COLUMNS = ["lambda", "seed", "awake_frac", "accuracy", "mflops"]
COMPARE_RUN_COLUMNS = ["policy", "param", "seed", "awake_frac", "accuracy", "mflops"]
METRIC_FIELDS = ["awake_frac", "accuracy", "mflops"]


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.6f}"
    return str(value)


def write_csv(path: PathLike, columns: Sequence[str], rows: Sequence[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    return path


def _write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def build_params(config: ExperimentConfig, seed: int, calibration: Sequence[SpikeTrain] = ()) -> ModelParams:
    """Seeded init, rescaled on the first `calibration_samples` trains when calibration is on"""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    arch = config.architecture
    params = init_params(
        config.layer_sizes,
        config.dataset.num_classes,
        rng,
        lif=config.lif,
        pulse_periods=arch.pulse_periods,
        vote_width=arch.vote_width,
        ctrl_init=arch.ctrl_init,
        init_gain=arch.init_gain,
        pulse_gain=arch.pulse_gain,
    )
    if arch.calibration_quantile is None or not calibration:
        return params
    sample = list(calibration)[: arch.calibration_samples]
    return calibrate_layer_scales(params, stack_trains(sample), arch.calibration_quantile)


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    train = config.train.model_copy(update={"seed": seed})
    return config.model_copy(update={"train": train})


def _attach_offsets(trains: List[SpikeTrain], offsets: Optional[Sequence[int]]) -> List[SpikeTrain]:
    if offsets is None or len(offsets) != len(trains):
        return trains
    return [replace(t, offset=int(o)) for t, o in zip(trains, offsets)]


def load_split(path: PathLike) -> List[SpikeTrain]:
    """Read a dataset file, restoring signal offsets from a sibling meta.json"""
    path = Path(path)
    trains = read_dataset(path)
    meta_path = path.parent / "meta.json"
    if meta_path.is_file():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        trains = _attach_offsets(trains, meta.get("offsets", {}).get(path.stem))
    return trains


def load_or_generate(config: ExperimentConfig, data_dir: Optional[PathLike]) -> Tuple[list, list]:
    if data_dir is None:
        return generate_dataset(config.dataset, config.splits.train, config.splits.test)
    data_dir = Path(data_dir)
    train, test = load_split(data_dir / "train.ssd"), load_split(data_dir / "test.ssd")
    for trains in (train, test):
        if trains and trains[0].num_channels != config.dataset.num_channels:
            raise ShapeMismatchError(
                f"dataset has {trains[0].num_channels} channels, "
                f"config expects {config.dataset.num_channels}"
            )
    return train, test


def cmd_gen_data(config: ExperimentConfig, out_dir: PathLike, seed: Optional[int] = None) -> List[Path]:
    """Write train.ssd, test.ssd and meta.json"""
    out_dir = Path(out_dir)
    spec = config.dataset if seed is None else config.dataset.model_copy(update={"seed": seed})
    train, test = generate_dataset(spec, config.splits.train, config.splits.test)
    C = spec.num_classes
    paths = [
        write_dataset(out_dir / "train.ssd", train, spec.num_channels, spec.horizon, C),
        write_dataset(out_dir / "test.ssd", test, spec.num_channels, spec.horizon, C),
        _write_json(out_dir / "meta.json", {
            "dataset": spec.model_dump(mode="json"),
            "config_hash": config_hash(config),
            "useful_fraction": spec.useful_fraction,
            "offsets": {
                "train": [t.offset for t in train],
                "test": [t.offset for t in test],
            },
        }),
    ]
    write_manifest(out_dir, build_manifest("gen-data", config, [spec.seed], paths))
    audit_log("data_generated", f"{len(train)} train / {len(test)} test samples in {out_dir}")
    return paths


def cmd_train(
    config: ExperimentConfig,
    out_dir: PathLike,
    seed: Optional[int] = None,
    stage: str = "both",
    data_dir: Optional[PathLike] = None,
    checkpoint: Optional[PathLike] = None,
    lambda_: Optional[float] = None,
) -> List[Path]:
    """Stage 1 then stage 2 (or either alone); writes checkpoint.npz and epochs.csv"""
    seed = config.train.seed if seed is None else seed
    config = with_seed(config, seed)
    out_dir = Path(out_dir)

    if stage == "2" and checkpoint is None:
        raise ConfigError("stage 2 alone needs a stage-1 checkpoint", "checkpoint")
    train, _ = load_or_generate(config, data_dir)
    if stage == "2":
        params, _ = load_checkpoint(checkpoint)
    else:
        params = build_params(config, seed, train)

    audit_log("run_started", f"train stage={stage} seed={seed}", config_hash=config_hash(config))
    with logger.contextualize(run="train", seed=seed):
        result = train_two_stage(config, train, params, stage, lambda_)

    lam = config.train.lambda_ if lambda_ is None else lambda_
    paths = [
        save_checkpoint(out_dir / "checkpoint.npz", result.params, {
            "seed": seed,
            "stage": stage,
            "lambda": lam,
            "config_hash": config_hash(config),
        }),
        write_epoch_log(out_dir / "epochs.csv", result.records),
    ]
    write_manifest(out_dir, build_manifest("train", config, [seed], paths, {"stage": stage, "lambda": lam}))
    audit_log("run_finished", f"train seed={seed} best epoch {result.best_epoch}")
    return paths


def sample_record(trace, b: int, train: SpikeTrain, prediction: int) -> dict:
    """Raster export plus the masked (reconstructed) input of one sample"""
    record = trace.sample_export(b)
    recon = trace.reconstructed_input(b)
    channels, times = np.nonzero(recon)
    order = np.lexsort((channels, times))
    record.update({
        "label": train.label,
        "prediction": int(prediction),
        "offset": train.offset,
        "reconstructed_events": [[int(times[i]), int(channels[i])] for i in order],
    })
    return record


def _signal_len(dataset: PathLike, config: Optional[ExperimentConfig]) -> Optional[int]:
    if config is not None:
        return config.dataset.signal_len
    meta_path = Path(dataset).parent / "meta.json"
    if meta_path.is_file():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return meta.get("dataset", {}).get("signal_len")
    return None


def cmd_eval(
    checkpoint: PathLike,
    dataset: PathLike,
    out_dir: PathLike,
    gate_mode: GateMode = GateMode.LEARNED,
    export_samples: int = 4,
    config: Optional[ExperimentConfig] = None,
) -> List[Path]:
    """metrics.json (accuracy, awake fraction, MFLOPs, ledger) and per-sample traces"""
    params, metadata = load_checkpoint(checkpoint)
    trains = load_split(dataset)
    if not trains:
        raise ShapeMismatchError(f"dataset {dataset} holds no samples")
    out_dir = Path(out_dir)
    X, y = stack_trains(trains), labels_of(trains)
    ledger = FlopLedger()
    result = evaluate(X, y, params, gate_mode, ledger=ledger)

    metrics = {
        "checkpoint": str(checkpoint),
        "dataset": str(dataset),
        "gate_mode": GateMode(gate_mode).value,
        "samples": len(trains),
        "accuracy": result.accuracy,
        "awake_frac": result.awake_frac,
        "mflops": total_mflops(ledger) / len(trains),
        "ledger": ledger.to_dict(),
        "checkpoint_metadata": metadata,
    }
    offsets = [t.offset for t in trains]
    signal_len = _signal_len(dataset, config)
    if all(o is not None for o in offsets) and signal_len and result.masks.sum() > 0:
        metrics["attention_localization"] = attention_localization(result.masks, offsets, signal_len)

    paths = [_write_json(out_dir / "metrics.json", metrics)]
    n_export = min(export_samples, len(trains))
    if n_export:
        trace = skipsnn_forward(X[:n_export], params, gate_mode)
        for b in range(n_export):
            paths.append(_write_json(
                out_dir / "traces" / f"sample_{b:04d}.json",
                sample_record(trace, b, trains[b], result.predictions[b]),
            ))
    seeds = [metadata["seed"]] if "seed" in metadata else []
    write_manifest(out_dir, build_manifest(
        "eval", config, seeds, paths,
        {"checkpoint": str(checkpoint), "dataset": str(dataset), "gate_mode": GateMode(gate_mode).value},
        fallback_hash=metadata.get("config_hash"),
    ))
    logger.info(
        f"eval: accuracy={result.accuracy:.4f} awake={result.awake_frac:.4f} "
        f"mflops={metrics['mflops']:.4f}"
    )
    return paths


def _stage1_by_seed(config: ExperimentConfig, train, seeds: Sequence[int]) -> Dict[int, ModelParams]:
    trained = {}
    for seed in seeds:
        seeded = with_seed(config, seed)
        with logger.contextualize(run="stage1", seed=seed):
            result = train_two_stage(seeded, train, build_params(seeded, seed, train), "1")
        trained[seed] = result.params
    return trained


def _aggregate_rows(runs: List[dict], keys: Sequence[str]) -> List[dict]:
    rows = []
    for key, stats in aggregate_runs(runs, keys, METRIC_FIELDS).items():
        row = dict(zip(keys, key))
        for name in METRIC_FIELDS:
            row[name] = stats[name]["mean"]
            row[f"{name}_std"] = stats[name]["std"]
        row["runs"] = stats["runs"]
        rows.append(row)
    return rows


def _aggregate_columns(keys: Sequence[str]) -> List[str]:
    return [*keys, *(c for name in METRIC_FIELDS for c in (name, f"{name}_std")), "runs"]


def cmd_sweep(
    config: ExperimentConfig,
    out_dir: PathLike,
    lambdas: Optional[Sequence[float]] = None,
    seeds: Optional[Sequence[int]] = None,
    data_dir: Optional[PathLike] = None,
) -> List[Path]:
    """
    λ trade-off curve: for every seed one stage-1 network, then one stage-2
    controller per λ, all evaluated on the test split.
    """
    lambdas = list(config.lambdas if lambdas is None else lambdas)
    seeds = list(config.seeds if seeds is None else seeds)
    out_dir = Path(out_dir)
    train, test = load_or_generate(config, data_dir)
    stage1 = _stage1_by_seed(config, train, seeds)

    runs = []
    for lam in lambdas:
        for seed in seeds:
            seeded = with_seed(config, seed)
            with logger.contextualize(run="sweep", seed=seed, lambda_=lam):
                result = train_two_stage(seeded, train, stage1[seed], "2", lam)
            report = evaluate_gate_mode(test, result.params, GateMode.LEARNED)
            runs.append({
                "lambda": lam,
                "seed": seed,
                "awake_frac": report.awake_frac,
                "accuracy": report.accuracy,
                "mflops": report.mflops,
            })

    paths = [
        write_csv(out_dir / "sweep_runs.csv", SWEEP_RUN_COLUMNS, runs),
        write_csv(out_dir / "sweep.csv", _aggregate_columns(["lambda"]), _aggregate_rows(runs, ["lambda"])),
    ]
    write_manifest(out_dir, build_manifest("sweep", config, seeds, paths, {"lambdas": lambdas}))
    audit_log("run_finished", f"sweep over {len(lambdas)} lambdas x {len(seeds)} seeds")
    return paths


def cmd_compare(
    config: ExperimentConfig,
    out_dir: PathLike,
    seeds: Optional[Sequence[int]] = None,
    data_dir: Optional[PathLike] = None,
    lambda_: Optional[float] = None,
) -> List[Path]:
    """
    One row per policy configuration: always-awake SNN, learned SkipSNN at λ,
    fixed-skip and random-skip at every configured fraction. Baselines reuse
    the stage-1 network of the same seed.
    """
    seeds = list(config.seeds if seeds is None else seeds)
    lam = config.train.lambda_ if lambda_ is None else lambda_
    out_dir = Path(out_dir)
    train, test = load_or_generate(config, data_dir)
    stage1 = _stage1_by_seed(config, train, seeds)

    runs = []
    for seed in seeds:
        params = stage1[seed]

        def add(policy, param, report):
            runs.append({
                "policy": policy,
                "param": param,
                "seed": seed,
                "awake_frac": report.awake_frac,
                "accuracy": report.accuracy,
                "mflops": report.mflops,
            })

        add("snn", 1.0, evaluate_gate_mode(test, params, GateMode.FORCED_AWAKE))
        with logger.contextualize(run="compare", seed=seed):
            learned = train_two_stage(with_seed(config, seed), train, params, "2", lam)
        add("skipsnn", lam, evaluate_gate_mode(test, learned.params, GateMode.LEARNED))
        for f in config.policies.fixed_fractions:
            add("fixed", f, evaluate_policy(test, params, fixed_factory(f)))
        for p in config.policies.random_probs:
            add("random", p, evaluate_policy(test, params, random_factory(p, seed)))

    keys = ["policy", "param"]
    paths = [
        write_csv(out_dir / "compare_runs.csv", COMPARE_RUN_COLUMNS, runs),
        write_csv(out_dir / "compare.csv", _aggregate_columns(keys), _aggregate_rows(runs, keys)),
    ]
    write_manifest(out_dir, build_manifest("compare", config, seeds, paths, {"lambda": lam}))
    audit_log("run_finished", f"compare over {len(seeds)} seeds")
    return paths

