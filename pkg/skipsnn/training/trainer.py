"""
Two-stage training.

Stage 1 pins the gate awake and fits the layer weights on the classification
loss alone. Stage 2 freezes those weights, lets the controller gate the input
and fits W_z, W_o on classification + λ·awake fraction, annealing the
controller surrogate's Δ as it goes.
"""
import csv
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from skipsnn.config.schemas import ExperimentConfig, SurrogateConfig, TrainConfig
from skipsnn.data.spiketrain import SpikeTrain, labels_of, stack_trains
from skipsnn.errors import NonFiniteLossError, TrainingDivergedError
from skipsnn.logs.logger import audit_log, logger
from skipsnn.metrics.ledger import FlopLedger
from skipsnn.snn.forward import GateMode, skipsnn_forward
from skipsnn.snn.params import ModelParams
from skipsnn.training.bptt import SurrogatePair, bptt
from skipsnn.training.losses import classification_losses, penalty_losses
from skipsnn.training.optimizers import build_optimizer
from skipsnn.training.surrogates import make_surrogate

EVAL_CHUNK = 64


@dataclass
class EpochRecord:
    epoch: int
    stage: int
    loss: float
    cls_loss: float
    penalty: float
    train_acc: float
    val_acc: Optional[float]
    awake_frac: float
    delta: Optional[float]


LOG_COLUMNS = [f.name for f in fields(EpochRecord)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_epoch_log(path: Union[str, Path], records: Sequence[EpochRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
        for record in records:
            writer.writerow([_fmt(v) for v in astuple(record)])
    return path


@dataclass
class EvalResult:
    loss: float
    cls_loss: float
    penalty: float
    accuracy: float
    awake_frac: float
    predictions: np.ndarray
    masks: np.ndarray


@dataclass
class TrainResult:
    params: ModelParams
    records: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False


def split_validation(trains: Sequence[SpikeTrain], val_fraction: float) -> Tuple[list, list]:
    """Carve the validation set from the tail of the training split"""
    n_val = int(round(len(trains) * val_fraction))
    if n_val == 0 or n_val >= len(trains):
        return list(trains), []
    return list(trains[:-n_val]), list(trains[-n_val:])


def evaluate(
    X: np.ndarray,
    y: np.ndarray,
    params: ModelParams,
    gate_mode: GateMode = GateMode.LEARNED,
    lambda_: float = 0.0,
    masks: Optional[np.ndarray] = None,
    ledger: Optional[FlopLedger] = None,
    chunk: int = EVAL_CHUNK,
) -> EvalResult:
    """Hard-network evaluation in chunks; `masks` is (N, T) for external mode"""
    cls, pen, preds, gates = [], [], [], []
    for start in range(0, len(X), chunk):
        stop = start + chunk
        mask = masks[start:stop] if masks is not None else None
        trace = skipsnn_forward(X[start:stop], params, gate_mode, ledger=ledger, mask=mask)
        cls.append(classification_losses(trace, y[start:stop], params.voting))
        pen.append(penalty_losses(trace.awake_mask, lambda_))
        preds.append(trace.predictions(params.voting))
        gates.append(trace.awake_mask)
    cls_all, pen_all = np.concatenate(cls), np.concatenate(pen)
    predictions, mask_all = np.concatenate(preds), np.concatenate(gates)
    return EvalResult(
        loss=float((cls_all + pen_all).mean()),
        cls_loss=float(cls_all.mean()),
        penalty=float(pen_all.mean()),
        accuracy=float(np.mean(predictions == y)),
        awake_frac=float(mask_all.mean()),
        predictions=predictions,
        masks=mask_all,
    )


def _run_stage(
    stage: int,
    train: Sequence[SpikeTrain],
    params: ModelParams,
    cfg: TrainConfig,
    trainable: List[str],
    gate_mode: GateMode,
    lambda_: float,
    surrogates_at,
    epochs: int,
    val: Sequence[SpikeTrain],
    delta_at=None,
) -> TrainResult:
    params = params.copy()
    X, y = stack_trains(train), labels_of(train)
    X_val, y_val = (stack_trains(val), labels_of(val)) if val else (None, None)
    optimizer = build_optimizer(cfg, trainable)
    rng = np.random.default_rng([cfg.seed, stage])

    result = TrainResult(params=params.copy())
    best_loss = np.inf
    stale = 0
    last_finite = None

    with logger.contextualize(stage=stage, seed=cfg.seed):
        for epoch in range(1, epochs + 1):
            surrogates: SurrogatePair = surrogates_at(epoch - 1)
            order = rng.permutation(len(X))
            sums = np.zeros(3)
            correct = 0
            awake = 0.0
            for start in range(0, len(order), cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                trace = skipsnn_forward(X[idx], params, gate_mode)
                try:
                    loss, grads = bptt(trace, y[idx], params, surrogates, lambda_, cfg.detach_reset)
                except NonFiniteLossError:
                    loss, grads = float("nan"), None
                if grads is None or not grads.all_finite():
                    logger.error(f"Stage {stage} diverged at epoch {epoch}")
                    raise TrainingDivergedError(stage, epoch, last_finite)
                last_finite = loss
                cls = classification_losses(trace, y[idx], params.voting)
                pen = penalty_losses(trace.awake_mask, lambda_)
                sums += [np.sum(cls + pen), np.sum(cls), np.sum(pen)]
                correct += int(np.sum(trace.predictions(params.voting) == y[idx]))
                awake += float(trace.gates.sum())
                optimizer.step(params, grads)
                logger.debug(f"batch {start // cfg.batch_size} loss={loss:.5f}")

            n = len(X)
            record = EpochRecord(
                epoch=epoch,
                stage=stage,
                loss=float(sums[0] / n),
                cls_loss=float(sums[1] / n),
                penalty=float(sums[2] / n),
                train_acc=correct / n,
                val_acc=None,
                awake_frac=awake / (n * X.shape[2]),
                delta=delta_at(epoch - 1) if delta_at else None,
            )
            monitored = record.loss
            if X_val is not None:
                val_result = evaluate(X_val, y_val, params, gate_mode, lambda_)
                record.val_acc = val_result.accuracy
                monitored = val_result.loss
            result.records.append(record)
            logger.info(
                f"stage {stage} epoch {epoch}/{epochs} loss={record.loss:.4f} "
                f"train_acc={record.train_acc:.3f} val_acc={_fmt(record.val_acc) or '-'} "
                f"awake={record.awake_frac:.3f}"
            )

            if monitored < best_loss:
                best_loss = monitored
                result.params = params.copy()
                result.best_epoch = epoch
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    logger.warning(f"Early stop in stage {stage} at epoch {epoch} (best epoch {result.best_epoch})")
                    result.stopped_early = True
                    break
    return result


def train_stage1(
    train: Sequence[SpikeTrain],
    params: ModelParams,
    cfg: TrainConfig,
    surr: SurrogateConfig = SurrogateConfig(),
    val: Sequence[SpikeTrain] = (),
) -> TrainResult:
    """Gate forced awake, λ ignored; updates layer weights (and voting if enabled)"""
    trainable = [f"W{j}" for j in range(len(params.layer_weights))]
    if cfg.train_voting:
        trainable.append("voting")
    h = make_surrogate(surr, params.lif.v_th)
    pair = SurrogatePair(main=h, ctrl=h)
    return _run_stage(
        1, train, params, cfg, trainable, GateMode.FORCED_AWAKE, 0.0,
        lambda epoch: pair, cfg.epochs_stage1, val,
    )


def train_stage2(
    train: Sequence[SpikeTrain],
    params: ModelParams,
    cfg: TrainConfig,
    surr_sigmoid: SurrogateConfig,
    main_surr: SurrogateConfig = SurrogateConfig(),
    val: Sequence[SpikeTrain] = (),
) -> TrainResult:
    """Learned gate, layer weights frozen; only W_z and W_o move"""
    v_th = params.lif.v_th
    h_main = make_surrogate(main_surr, v_th)

    def surrogates_at(epoch: int) -> SurrogatePair:
        return SurrogatePair(main=h_main, ctrl=make_surrogate(surr_sigmoid, v_th, surr_sigmoid.delta_at(epoch)))

    return _run_stage(
        2, train, params, cfg, ["ctrl_wz", "ctrl_wo"], GateMode.LEARNED, cfg.lambda_,
        surrogates_at, cfg.epochs_stage2, val, delta_at=surr_sigmoid.delta_at,
    )


def train_two_stage(
    config: ExperimentConfig,
    train: Sequence[SpikeTrain],
    params: ModelParams,
    stage: str = "both",
    lambda_: Optional[float] = None,
) -> TrainResult:
    """Stage 1 then stage 2 on a train/validation split of `train`"""
    cfg = config.train
    if lambda_ is not None:
        cfg = cfg.model_copy(update={"lambda_": lambda_})
    fit, val = split_validation(train, cfg.val_fraction)
    records: List[EpochRecord] = []
    result = TrainResult(params=params)

    if stage in ("1", "both"):
        result = train_stage1(fit, result.params, cfg, config.stage1_surrogate, val)
        records += result.records
        audit_log("stage_finished", f"stage 1 best epoch {result.best_epoch}", seed=cfg.seed)
    if stage in ("2", "both"):
        result = train_stage2(fit, result.params, cfg, config.stage2_surrogate, config.stage1_surrogate, val)
        records += result.records
        audit_log("stage_finished", f"stage 2 best epoch {result.best_epoch} (lambda={cfg.lambda_})", seed=cfg.seed)
    result.records = records
    return result
