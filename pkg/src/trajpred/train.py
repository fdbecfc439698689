"""Training, evaluation, ablation runs and prediction overlays."""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
import torch

from .decoder import MTPLossConfig, constant_velocity_baseline, mtp_loss
from .metrics import REPORT_COLUMNS, MetricReport, evaluate_predictions
from .model import ModelConfig, SampleFeatures, TrajectoryPredictor, collate, feature_statistics, featurize, predict
from .raster import RasterConfig, in_window, save_png, to_pixels
from .scene import DEFAULT_NUM_MODES, PredictionSet, Sample

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = "trajpred-checkpoint/1"
PREDICTION_COLOR = (255, 0, 0)
GROUND_TRUTH_COLOR = (0, 255, 0)


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 6e-4
    lr_step_size: int = 2  # epochs
    lr_gamma: float = 0.9
    epochs: int = 50
    max_steps: int | None = None
    dropout: float = 0.2
    batch_size: int = 32
    seed: int = 0
    num_modes: int = DEFAULT_NUM_MODES
    backbone: str = "tiny_cnn"
    use_map: bool = True
    use_distance_attention: bool = True
    use_area_attention: bool = True
    use_physical_info: bool = True
    lstm_layers: int = 2
    regression_weight: float = 1.0
    selection: str = "min_ade"
    num_threads: int = 1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be at least 1")

    def model_config(self, feature_mean=(0.0,) * 5, feature_std=(1.0,) * 5) -> ModelConfig:
        return ModelConfig(
            num_modes=self.num_modes, backbone=self.backbone, lstm_layers=self.lstm_layers,
            dropout=self.dropout, use_map=self.use_map,
            use_distance_attention=self.use_distance_attention, use_area_attention=self.use_area_attention,
            use_physical_info=self.use_physical_info,
            feature_mean=tuple(float(v) for v in feature_mean), feature_std=tuple(float(v) for v in feature_std))

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class RunRecord:
    config: dict
    epoch_losses: list[float] = field(default_factory=list)
    report: MetricReport | None = None
    wall_clock: float = 0.0
    throughput: float = 0.0

    def to_dict(self) -> dict:
        return {"config": self.config, "epoch_losses": self.epoch_losses,
                "report": None if self.report is None else self.report.to_dict(),
                "wall_clock": self.wall_clock, "throughput": self.throughput}


def as_features(data: Sequence[Sample] | Sequence[SampleFeatures], raster_config: RasterConfig = RasterConfig()):
    return [d if isinstance(d, SampleFeatures) else featurize(d, raster_config) for d in data]


def _first_non_finite(named: Sequence[tuple[str, torch.Tensor]]) -> str | None:
    for role, tensor in named:
        if not torch.isfinite(tensor).all():
            return role
    return None


def train(config: TrainConfig, dataset, progress: Callable[[int, float], None] | None = None):
    """Fit a model on ``dataset`` (samples in the target frame, or precomputed features).

    Returns the trained model and a :class:`RunRecord` with per-epoch mean losses.
    """
    items = as_features(dataset)
    if not items:
        raise ValueError("cannot train on an empty dataset")
    torch.set_num_threads(config.num_threads)
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    mean, std = feature_statistics(items)
    model = TrajectoryPredictor(config.model_config(mean, std))
    loss_config = MTPLossConfig(config.regression_weight, config.selection)
    optimizer = torch.optim.NAdam(model.parameters(), lr=config.learning_rate)
    scheduler = torch.optim.lr_scheduler.StepLR(optimizer, step_size=config.lr_step_size, gamma=config.lr_gamma)
    record = RunRecord(config=dataclasses.asdict(config))
    start = time.perf_counter()
    step = 0
    model.train()
    for epoch in range(config.epochs):
        order = rng.permutation(len(items))
        losses = []
        for i in range(0, len(items), config.batch_size):
            batch = collate([items[j] for j in order[i:i + config.batch_size]], with_map=config.use_map)
            traj, logits = model(batch)
            loss = mtp_loss(traj, logits, batch["future"], loss_config)
            bad = _first_non_finite([("trajectory head output", traj), ("score head logits", logits),
                                     ("regression loss", loss.regression),
                                     ("classification loss", loss.classification)])
            if bad is not None:
                raise TrainingDivergedError(f"non-finite {bad} at epoch {epoch}, step {step}")
            optimizer.zero_grad()
            loss.total.backward()
            optimizer.step()
            losses.append(float(loss.total.detach()))
            step += 1
            if config.max_steps is not None and step >= config.max_steps:
                break
        scheduler.step()
        record.epoch_losses.append(float(np.mean(losses)))
        if progress is not None:
            progress(epoch, record.epoch_losses[-1])
        log.debug("epoch %d loss %.4f", epoch, record.epoch_losses[-1])
        if config.max_steps is not None and step >= config.max_steps:
            break
    record.wall_clock = time.perf_counter() - start
    model.eval()
    return model, record


class ConstantVelocityPredictor:
    """Adapter so the constant velocity-and-yaw baseline runs through :func:`evaluate`."""

    def __init__(self, num_modes: int = DEFAULT_NUM_MODES):
        self.num_modes = num_modes

    def predict_samples(self, samples: Sequence[Sample]) -> list[PredictionSet]:
        return [constant_velocity_baseline(s, self.num_modes) for s in samples]


def evaluate(model, split, raster_config: RasterConfig = RasterConfig()) -> tuple[MetricReport, float]:
    """Metric report and inference throughput (samples/s) for ``model`` on ``split``.

    ``model`` may be a :class:`TrajectoryPredictor`, a checkpoint path or a
    :class:`ConstantVelocityPredictor`.  The model itself is not modified.
    """
    if isinstance(model, (str, Path)):
        model = load_checkpoint(model)
    if isinstance(model, ConstantVelocityPredictor):
        samples = list(split)
        start = time.perf_counter()
        preds = model.predict_samples(samples)
        elapsed = time.perf_counter() - start
        from .raster import drivable_mask

        masks = [drivable_mask(s, raster_config) for s in samples]
        gts = [s.future for s in samples]
    else:
        items = as_features(split, raster_config)
        start = time.perf_counter()
        preds = predict(model, items)
        elapsed = time.perf_counter() - start
        masks = [it.drivable for it in items]
        gts = [it.future for it in items]
    report = evaluate_predictions(preds, gts, masks, raster_config)
    return report, len(preds) / max(elapsed, 1e-9)


def save_checkpoint(model: TrajectoryPredictor, path) -> None:
    torch.save({"version": CHECKPOINT_VERSION, "model_config": dataclasses.asdict(model.config),
                "state_dict": model.state_dict()}, path)


def load_checkpoint(path) -> TrajectoryPredictor:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    if blob.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {blob.get('version')!r}")
    cfg = dict(blob["model_config"])
    cfg["feature_mean"], cfg["feature_std"] = tuple(cfg["feature_mean"]), tuple(cfg["feature_std"])
    model = TrajectoryPredictor(ModelConfig(**cfg))
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model


# ---------------------------------------------------------------------------
# ablations


def ablation_matrix(base: TrainConfig = TrainConfig()) -> dict[str, TrainConfig]:
    """Rows mirroring the attention, physical-info, LSTM-depth and component ablations."""
    r = dataclasses.replace
    return {
        "Weighted distance attention": r(base, use_area_attention=False),
        "Weighted distance + area attention": r(base),
        "Without physical properties": r(base, use_area_attention=False, use_physical_info=False),
        "With physical properties": r(base, use_area_attention=False),
        "1 LSTM": r(base, lstm_layers=1),
        "2 LSTMs": r(base, lstm_layers=2),
        "Target encoder": r(base, use_map=False, use_distance_attention=False, use_area_attention=False),
        "Target encoder + Map": r(base, use_distance_attention=False, use_area_attention=False),
        "Target encoder + Attention": r(base, use_map=False),
        "Target encoder + Map + Attention": r(base),
    }


@dataclass
class AblationTable:
    rows: list[tuple[str, dict | None, str | None]] = field(default_factory=list)

    def add(self, name: str, report: MetricReport | None, error: str | None = None):
        self.rows.append((name, None if report is None else report.row(), error))

    def to_markdown(self) -> str:
        lines = ["| Exp | " + " | ".join(REPORT_COLUMNS) + " |", "|---" * (len(REPORT_COLUMNS) + 1) + "|"]
        for name, row, error in self.rows:
            cells = ["FAILED: " + error] + [""] * (len(REPORT_COLUMNS) - 1) if row is None else \
                [f"{row[c]:.3f}" for c in REPORT_COLUMNS]
            lines.append(f"| {name} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"columns": list(REPORT_COLUMNS),
                "rows": [{"name": n, "metrics": r, "error": e} for n, r, e in self.rows]}


def run_ablation(configs: Mapping[str, TrainConfig], train_data, test_data,
                 raster_config: RasterConfig = RasterConfig()) -> AblationTable:
    """Train and evaluate each configuration; a failing run is recorded and the rest continue."""
    train_items = as_features(train_data, raster_config)
    test_items = as_features(test_data, raster_config)
    table = AblationTable()
    for name, cfg in configs.items():
        try:
            model, _ = train(cfg, train_items)
            report, _ = evaluate(model, test_items, raster_config)
        except Exception as exc:  # noqa: BLE001 - recorded in the table
            log.warning("ablation row %r failed: %s", name, exc)
            table.add(name, None, f"{type(exc).__name__}: {exc}")
        else:
            table.add(name, report)
    return table


# ---------------------------------------------------------------------------
# rendering


def overlay_predictions(raster: np.ndarray, pred: PredictionSet, future: np.ndarray,
                        raster_config: RasterConfig = RasterConfig()) -> np.ndarray:
    """Paint predicted waypoints red and ground-truth waypoints green onto a copy of ``raster``."""
    img = raster.copy()
    for points, color in ((pred.modes.reshape(-1, 2), PREDICTION_COLOR), (np.asarray(future), GROUND_TRUTH_COLOR)):
        pix = to_pixels(points, raster_config)
        pix = pix[in_window(pix, raster_config)]
        img[pix[:, 0], pix[:, 1]] = color
    return img


def export_predictions(model, samples: Sequence[Sample], out_dir,
                       raster_config: RasterConfig = RasterConfig()) -> list[Path]:
    """Write one PNG per sample with predictions and ground truth overlaid."""
    if isinstance(model, (str, Path)):
        model = load_checkpoint(model)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    items = as_features(samples, raster_config)
    preds = predict(model, items)
    paths = []
    for i, (it, pred) in enumerate(zip(items, preds)):
        path = out_dir / f"{i:04d}_{it.sample_id}.png"
        save_png(overlay_predictions(it.raster, pred, it.future, raster_config), path)
        paths.append(path)
    return paths
