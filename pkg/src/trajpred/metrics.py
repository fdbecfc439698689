"""Displacement, miss-rate and off-road metrics over the k most probable modes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .raster import RasterConfig, in_window, to_pixels
from .scene import PredictionSet

MISS_THRESHOLD = 2.0

# Column names as they appear in the results tables.
REPORT_COLUMNS = ("minADE_1", "minADE_5", "minFDE_1", "minFDE_5", "missRate_1", "missRate_5", "Off-Road Rate")


def top_k(pred: PredictionSet, k: int) -> np.ndarray:
    """Indices of the k most probable modes, most probable first; ties keep the lower index."""
    if not 1 <= k <= pred.num_modes:
        raise ValueError(f"k must lie in [1, {pred.num_modes}], got {k}")
    return np.argsort(-pred.probabilities, kind="stable")[:k]


def _errors(pred: PredictionSet, gt: np.ndarray, k: int) -> np.ndarray:
    gt = np.asarray(gt, dtype=float)
    if gt.shape != pred.modes.shape[1:]:
        raise ValueError(f"ground truth shape {gt.shape} does not match modes {pred.modes.shape[1:]}")
    return np.linalg.norm(pred.modes[top_k(pred, k)] - gt, axis=-1)  # (k, T)


def min_ade_k(pred: PredictionSet, gt: np.ndarray, k: int) -> float:
    return float(_errors(pred, gt, k).mean(axis=1).min())


def min_fde_k(pred: PredictionSet, gt: np.ndarray, k: int) -> float:
    return float(_errors(pred, gt, k)[:, -1].min())


def is_miss(pred: PredictionSet, gt: np.ndarray, k: int, threshold: float = MISS_THRESHOLD) -> bool:
    """A miss: every one of the top-k modes strays more than ``threshold`` at some step."""
    return bool((_errors(pred, gt, k).max(axis=1) > threshold).all())


def miss_rate_k(preds: Sequence[PredictionSet], gts: Sequence[np.ndarray], k: int,
                threshold: float = MISS_THRESHOLD) -> float:
    if len(preds) == 0:
        raise ValueError("miss rate needs at least one sample")
    if len(preds) != len(gts):
        raise ValueError("one ground truth per prediction is required")
    return sum(is_miss(p, g, k, threshold) for p, g in zip(preds, gts)) / len(preds)


def offroad_flags(pred: PredictionSet, mask: np.ndarray, config: RasterConfig = RasterConfig()) -> np.ndarray:
    """Per mode: True if any waypoint falls outside the drivable mask or the raster window."""
    if mask is None:
        raise ValueError("a drivable mask is required for the off-road metric")
    pix = to_pixels(pred.modes, config)  # (K, T, 2)
    inside = in_window(pix, config)
    rows = np.clip(pix[..., 0], 0, config.height_px - 1)
    cols = np.clip(pix[..., 1], 0, config.width_px - 1)
    on_road = inside & np.asarray(mask, dtype=bool)[rows, cols]
    return ~on_road.all(axis=1)


def offroad_rate(preds: Sequence[PredictionSet], masks: Sequence[np.ndarray],
                 config: RasterConfig = RasterConfig()) -> float:
    """Fraction of all predicted trajectories, over every mode of every sample, that leave the road."""
    if len(masks) != len(preds):
        raise ValueError("one drivable mask per prediction is required")
    flags = [offroad_flags(p, m, config) for p, m in zip(preds, masks)]
    total = sum(len(f) for f in flags)
    if total == 0:
        raise ValueError("off-road rate needs at least one trajectory")
    return float(sum(f.sum() for f in flags) / total)


@dataclass(frozen=True)
class MetricReport:
    minADE_1: float
    minADE_5: float
    minFDE_1: float
    minFDE_5: float
    missRate_1: float
    missRate_5: float
    offroad_rate: float
    sample_count: int

    def __post_init__(self):
        tol = 1e-12
        if self.minADE_5 > self.minADE_1 + tol or self.minFDE_5 > self.minFDE_1 + tol:
            raise ValueError("min-displacement metrics must not grow with k")
        if self.missRate_5 > self.missRate_1 + tol:
            raise ValueError("miss rate must not grow with k")
        for rate in (self.missRate_1, self.missRate_5, self.offroad_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"rate {rate} outside [0, 1]")

    def row(self) -> dict[str, float]:
        return dict(zip(REPORT_COLUMNS, (self.minADE_1, self.minADE_5, self.minFDE_1, self.minFDE_5,
                                         self.missRate_1, self.missRate_5, self.offroad_rate)))

    def to_dict(self) -> dict:
        return {**self.row(), "sample_count": self.sample_count}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        values = [float(d[c]) for c in REPORT_COLUMNS]
        return cls(*values, sample_count=int(d["sample_count"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def sample_metrics(pred: PredictionSet, gt: np.ndarray, mask: np.ndarray | None,
                   config: RasterConfig = RasterConfig()) -> dict[str, float]:
    """All per-sample quantities; k=5 is clamped to the number of modes available."""
    k5 = min(5, pred.num_modes)
    out = {
        "minADE_1": min_ade_k(pred, gt, 1), "minADE_5": min_ade_k(pred, gt, k5),
        "minFDE_1": min_fde_k(pred, gt, 1), "minFDE_5": min_fde_k(pred, gt, k5),
        "missRate_1": float(is_miss(pred, gt, 1)), "missRate_5": float(is_miss(pred, gt, k5)),
    }
    out["Off-Road Rate"] = float(offroad_flags(pred, mask, config).mean()) if mask is not None else float("nan")
    return out


def aggregate_report(per_sample: Sequence[dict[str, float]]) -> MetricReport:
    """Arithmetic means over the split."""
    if not per_sample:
        raise ValueError("cannot aggregate an empty split")
    means = [float(np.mean([m[c] for m in per_sample])) for c in REPORT_COLUMNS]
    return MetricReport(*means, sample_count=len(per_sample))


def evaluate_predictions(preds: Sequence[PredictionSet], gts: Sequence[np.ndarray],
                         masks: Sequence[np.ndarray], config: RasterConfig = RasterConfig()) -> MetricReport:
    return aggregate_report([sample_metrics(p, g, m, config) for p, g, m in zip(preds, gts, masks)])
