"""Sample featurisation, batching and the full prediction network."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
from torch import nn

from .attention import InteractionAttention
from .decoder import (MultiModeDecoder, build_context, constant_velocity_rollout, encode_object_info,
                      mode_probabilities)
from .encoders import FEATURE_DIM, EncoderParams, MapEncoder, TrackEncoder
from .raster import RasterConfig, drivable_mask, rasterize
from .scene import DEFAULT_NUM_MODES, HISTORY_STEPS, AgentTrack, PredictionSet, Sample

TRACK_FEATURES = ("x", "y", "v", "a", "yaw_rate")


@dataclass
class SampleFeatures:
    sample_id: str
    raster: np.ndarray  # (H, W, 3) uint8
    drivable: np.ndarray  # (H, W) bool
    target_hist: np.ndarray  # (T, 5)
    target_valid: np.ndarray  # (T,)
    target_info: np.ndarray  # (9,)
    target_area: float
    nbr_hist: np.ndarray  # (N, T, 5)
    nbr_valid: np.ndarray  # (N, T)
    nbr_pos: np.ndarray  # (N, 2)
    nbr_area: np.ndarray  # (N,)
    future: np.ndarray  # (T_f, 2)
    prior: np.ndarray  # (T_f, 2) constant velocity-and-yaw rollout of the target


def track_features(track: AgentTrack) -> tuple[np.ndarray, np.ndarray]:
    feats = np.array([s.features() for s in track.states], dtype=float)
    valid = np.array([s.valid for s in track.states], dtype=bool)
    return feats, valid


def featurize(sample: Sample, raster_config: RasterConfig = RasterConfig()) -> SampleFeatures:
    """Model inputs for one sample that is already in the target frame."""
    t_hist, t_valid = track_features(sample.target)
    n = len(sample.neighbors)
    nbr = [track_features(tr) for tr in sample.neighbors]
    steps = HISTORY_STEPS + 1
    return SampleFeatures(
        sample_id=sample.sample_id,
        raster=rasterize(sample, raster_config),
        drivable=drivable_mask(sample, raster_config),
        target_hist=t_hist,
        target_valid=t_valid,
        target_info=encode_object_info(sample.target.info),
        target_area=sample.target.info.area,
        nbr_hist=np.array([f for f, _ in nbr]).reshape(n, steps, len(TRACK_FEATURES)),
        nbr_valid=np.array([v for _, v in nbr], dtype=bool).reshape(n, steps),
        nbr_pos=np.array([[tr.current.x, tr.current.y] for tr in sample.neighbors]).reshape(n, 2),
        nbr_area=np.array([tr.info.area for tr in sample.neighbors]).reshape(n),
        future=np.asarray(sample.future, dtype=float),
        prior=constant_velocity_rollout(sample.target.current),
    )


def collate(items: Sequence[SampleFeatures], with_map: bool = True) -> dict[str, torch.Tensor]:
    """Stack features into batch tensors, padding neighbours with masked-out slots."""
    b = len(items)
    steps = items[0].target_hist.shape[0]
    n_max = max(len(it.nbr_area) for it in items)
    nbr_hist = np.zeros((b, n_max, steps, len(TRACK_FEATURES)))
    nbr_valid = np.zeros((b, n_max, steps), dtype=bool)
    nbr_pos = np.zeros((b, n_max, 2))
    nbr_area = np.zeros((b, n_max))
    for i, it in enumerate(items):
        n = len(it.nbr_area)
        nbr_hist[i, :n], nbr_valid[i, :n] = it.nbr_hist, it.nbr_valid
        nbr_pos[i, :n], nbr_area[i, :n] = it.nbr_pos, it.nbr_area
    f32 = lambda a: torch.as_tensor(np.asarray(a), dtype=torch.float32)  # noqa: E731
    batch = {
        "target_hist": f32(np.stack([it.target_hist for it in items])),
        "target_valid": torch.as_tensor(np.stack([it.target_valid for it in items])),
        "target_info": f32(np.stack([it.target_info for it in items])),
        "target_area": f32([it.target_area for it in items]),
        "nbr_hist": f32(nbr_hist),
        "nbr_valid": torch.as_tensor(nbr_valid),
        "nbr_mask": torch.as_tensor(nbr_valid[..., -1]),
        "nbr_pos": f32(nbr_pos),
        "nbr_area": f32(nbr_area),
        "future": f32(np.stack([it.future for it in items])),
        "prior": f32(np.stack([it.prior for it in items])),
    }
    if with_map:
        raster = torch.as_tensor(np.stack([it.raster for it in items]))
        batch["raster"] = raster.permute(0, 3, 1, 2).float().div_(255.0)
    return batch


def feature_statistics(items: Sequence[SampleFeatures]) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature mean and std over every valid history step of targets and neighbours."""
    rows = [it.target_hist[it.target_valid] for it in items]
    rows += [it.nbr_hist[it.nbr_valid] for it in items if len(it.nbr_area)]
    data = np.concatenate(rows)
    std = data.std(axis=0)
    return data.mean(axis=0), np.where(std > 1e-6, std, 1.0)


@dataclass(frozen=True)
class ModelConfig:
    num_modes: int = DEFAULT_NUM_MODES
    backbone: str = "tiny_cnn"
    lstm_layers: int = 2
    dropout: float = 0.2
    use_map: bool = True
    use_distance_attention: bool = True
    use_area_attention: bool = True
    use_physical_info: bool = True
    decoder_hidden: int = 256
    output_scale: float = 10.0
    # Decode each mode as an offset from the constant velocity-and-yaw rollout.
    residual_on_cv: bool = True
    feature_mean: tuple = field(default=(0.0,) * 5)
    feature_std: tuple = field(default=(1.0,) * 5)

    @property
    def encoder_params(self) -> EncoderParams:
        return EncoderParams(backbone=self.backbone, lstm_layers=self.lstm_layers, dropout=self.dropout)

    @property
    def uses_attention(self) -> bool:
        return self.use_distance_attention or self.use_area_attention


class TrajectoryPredictor(nn.Module):
    def __init__(self, config: ModelConfig = ModelConfig()):
        super().__init__()
        self.config = config
        params = config.encoder_params
        self.map_encoder = MapEncoder(params)
        self.target_encoder = TrackEncoder(len(TRACK_FEATURES), params=params)
        self.neighbor_encoder = TrackEncoder(len(TRACK_FEATURES), params=params)
        self.attention = InteractionAttention(config.use_distance_attention, config.use_area_attention)
        self.decoder = MultiModeDecoder(config.num_modes, hidden=config.decoder_hidden,
                                        output_scale=config.output_scale, params=params)
        self.register_buffer("feature_mean", torch.tensor(config.feature_mean, dtype=torch.float32))
        self.register_buffer("feature_std", torch.tensor(config.feature_std, dtype=torch.float32))

    def _standardize(self, x: torch.Tensor) -> torch.Tensor:
        return (x - self.feature_mean.to(x.dtype)) / self.feature_std.to(x.dtype)

    def context(self, batch: dict[str, torch.Tensor]) -> torch.Tensor:
        cfg = self.config
        hist = batch["target_hist"].to(self.feature_mean.dtype)
        b = hist.shape[0]
        h_target = self.target_encoder(self._standardize(hist), batch["target_valid"])
        if cfg.use_map:
            h_map = self.map_encoder(batch["raster"].to(hist.dtype))
        else:
            h_map = hist.new_zeros(b, FEATURE_DIM)
        nbr = batch["nbr_hist"].to(hist.dtype)
        if cfg.uses_attention and nbr.shape[1] > 0:
            n = nbr.shape[1]
            flat = self.neighbor_encoder(self._standardize(nbr.reshape(b * n, *nbr.shape[2:])),
                                         batch["nbr_valid"].reshape(b * n, -1))
            h_att = self.attention(hist.new_zeros(b, 2), batch["nbr_pos"].to(hist.dtype),
                                   batch["target_area"].to(hist.dtype), batch["nbr_area"].to(hist.dtype),
                                   flat.reshape(b, n, FEATURE_DIM), batch["nbr_mask"])
        else:
            h_att = hist.new_zeros(b, 2 * FEATURE_DIM)
        info = batch["target_info"].to(hist.dtype)
        if not cfg.use_physical_info:
            info = torch.zeros_like(info)
        return build_context(h_map, h_target, h_att, info)

    def forward(self, batch: dict[str, torch.Tensor]):
        """Returns trajectories (B, K, T_f, 2) and mode logits (B, K)."""
        prior = batch["prior"].to(self.feature_mean.dtype) if self.config.residual_on_cv else None
        return self.decoder(self.context(batch), prior)


@torch.no_grad()
def predict(model: TrajectoryPredictor, items: Sequence[SampleFeatures], batch_size: int = 64) -> list[PredictionSet]:
    was_training = model.training
    model.eval()
    out = []
    try:
        for i in range(0, len(items), batch_size):
            chunk = items[i:i + batch_size]
            traj, logits = model(collate(chunk, with_map=model.config.use_map))
            probs = mode_probabilities(logits.double())
            out += [PredictionSet(t.double().numpy(), p.numpy()) for t, p in zip(traj, probs)]
    finally:
        model.train(was_training)
    return out
