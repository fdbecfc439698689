"""Context assembly, multi-mode trajectory/score decoders, the MTP loss and the CV baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .encoders import FEATURE_DIM, EncoderParams, TrackEncoder
from .scene import (DEFAULT_NUM_MODES, DT, FUTURE_STEPS, OBJECT_CLASSES, AgentState, ObjectInfo, PredictionSet,
                    Sample)

LENGTH_SCALE = 10.0
WIDTH_SCALE = 3.0
OBJECT_DIM = len(OBJECT_CLASSES) + 2
CONTEXT_DIM = FEATURE_DIM + FEATURE_DIM + 2 * FEATURE_DIM + OBJECT_DIM  # 521


def encode_object_info(info: ObjectInfo) -> np.ndarray:
    """One-hot class (unknown classes map to "other") followed by scaled length and width."""
    out = np.zeros(OBJECT_DIM)
    cls = info.object_class if info.object_class in OBJECT_CLASSES else "other"
    out[OBJECT_CLASSES.index(cls)] = 1.0
    out[-2] = info.length / LENGTH_SCALE
    out[-1] = info.width / WIDTH_SCALE
    return out


def build_context(h_map, h_target, h_att, target_info):
    """Concatenate [map | target track | interaction | object info] into the 521-d context.

    ``target_info`` is either an :class:`ObjectInfo` or an already encoded
    (..., 9) array/tensor.  Works on numpy arrays or torch tensors.
    """
    dims = (FEATURE_DIM, FEATURE_DIM, 2 * FEATURE_DIM)
    for name, part, dim in zip(("h_map", "h_target", "h_att"), (h_map, h_target, h_att), dims):
        if part.shape[-1] != dim:
            raise ValueError(f"{name} must have length {dim}, got {part.shape[-1]}")
    if isinstance(target_info, ObjectInfo):
        target_info = encode_object_info(target_info)
    if isinstance(h_map, torch.Tensor):
        o = torch.as_tensor(target_info, dtype=h_map.dtype)
        return torch.cat([h_map, h_target, h_att, o.expand(*h_map.shape[:-1], OBJECT_DIM)], dim=-1)
    return np.concatenate([h_map, h_target, h_att, np.broadcast_to(target_info, (*np.shape(h_map)[:-1], OBJECT_DIM))], axis=-1)


class ModeDecoder(nn.Module):
    """One mode: a trajectory head and a score head that re-encodes the predicted path.

    The score head sees the trajectory detached, so the classification loss
    cannot pull on waypoints; only the winning mode's regression does.
    """

    def __init__(self, hidden: int = 256, horizon: int = FUTURE_STEPS, output_scale: float = 10.0,
                 params: EncoderParams = EncoderParams()):
        super().__init__()
        self.horizon = horizon
        self.output_scale = output_scale
        self.trajectory_head = nn.Sequential(nn.Linear(CONTEXT_DIM, hidden), nn.ELU(), nn.Linear(hidden, 2 * horizon))
        self.path_encoder = TrackEncoder(in_features=2, seq_len=horizon, params=params)
        self.score_head = nn.Sequential(nn.Linear(CONTEXT_DIM + FEATURE_DIM, hidden), nn.ELU(), nn.Linear(hidden, 1))

    def forward(self, context: torch.Tensor, prior: torch.Tensor | None = None):
        traj = self.trajectory_head(context).view(-1, self.horizon, 2) * self.output_scale
        if prior is not None:
            traj = traj + prior
        path = self.path_encoder(traj.detach() / self.output_scale)
        logit = self.score_head(torch.cat([context, path], dim=-1)).squeeze(-1)
        return traj, logit


class MultiModeDecoder(nn.Module):
    def __init__(self, num_modes: int = DEFAULT_NUM_MODES, **kwargs):
        super().__init__()
        self.modes = nn.ModuleList(ModeDecoder(**kwargs) for _ in range(num_modes))

    def forward(self, context: torch.Tensor, prior: torch.Tensor | None = None):
        """(B, 521) -> trajectories (B, K, T, 2), logits (B, K).

        ``prior`` (B, T, 2), when given, is added to every mode's head output.
        """
        if context.shape[-1] != CONTEXT_DIM:
            raise ValueError(f"context must have {CONTEXT_DIM} features, got {context.shape[-1]}")
        outs = [m(context, prior) for m in self.modes]
        return torch.stack([t for t, _ in outs], dim=1), torch.stack([s for _, s in outs], dim=1)


def mode_probabilities(logits):
    """Softmax across modes (last axis)."""
    if isinstance(logits, torch.Tensor):
        return torch.softmax(logits, dim=-1)
    z = np.asarray(logits, dtype=float)
    z = np.exp(z - z.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class MTPLossConfig:
    regression_weight: float = 1.0
    selection: str = "min_ade"

    def __post_init__(self):
        if not self.regression_weight > 0:
            raise ValueError("regression_weight must be positive")
        if self.selection not in ("min_ade", "min_fde"):
            raise ValueError(f"unknown selection rule {self.selection!r}")


@dataclass
class LossBreakdown:
    total: torch.Tensor
    regression: torch.Tensor
    classification: torch.Tensor
    best_mode: torch.Tensor  # (B,) long


def select_best_mode(trajectories: torch.Tensor, gt: torch.Tensor, selection: str = "min_ade") -> torch.Tensor:
    """Index of the mode closest to ``gt``; ties resolve to the lowest index."""
    with torch.no_grad():
        err = torch.linalg.vector_norm(trajectories - gt.unsqueeze(1), dim=-1)  # (B, K, T)
        score = err.mean(-1) if selection == "min_ade" else err[..., -1]
        # argmin returns the first minimum, which is the tie-break we want.
        return score.argmin(dim=1)


def mtp_loss(trajectories: torch.Tensor, logits: torch.Tensor, gt: torch.Tensor,
             config: MTPLossConfig = MTPLossConfig()) -> LossBreakdown:
    """Winner-takes-all loss averaged over the batch.

    trajectories (B, K, T, 2), logits (B, K), gt (B, T, 2).  Regression is the
    mean squared error of the best mode's 2T coordinates; classification is
    the cross-entropy of the best mode under the softmax over logits.
    """
    if trajectories.dim() == 3:
        trajectories, logits, gt = trajectories[None], logits[None], gt[None]
    if not torch.isfinite(gt).all():
        raise ValueError("ground truth contains non-finite values")
    if trajectories.shape[0] != gt.shape[0] or trajectories.shape[2:] != gt.shape[1:]:
        raise ValueError(f"shape mismatch: {tuple(trajectories.shape)} vs ground truth {tuple(gt.shape)}")
    best = select_best_mode(trajectories, gt, config.selection)
    rows = torch.arange(trajectories.shape[0])
    chosen = trajectories[rows, best]
    regression = (chosen - gt).pow(2).mean(dim=(1, 2))
    classification = -F.log_softmax(logits, dim=-1)[rows, best]
    total = classification + config.regression_weight * regression
    return LossBreakdown(total.mean(), regression.mean(), classification.mean(), best)


def constant_velocity_rollout(state: AgentState, steps: int = FUTURE_STEPS, dt: float = DT) -> np.ndarray:
    """(steps, 2) positions holding speed and yaw rate: an exact arc, or a line when yaw rate is 0."""
    s = state
    times = np.arange(1, steps + 1) * dt
    if abs(s.yaw_rate) < 1e-12:
        xs = s.x + s.v * times * math.cos(s.heading)
        ys = s.y + s.v * times * math.sin(s.heading)
    else:
        radius = s.v / s.yaw_rate
        th = s.heading + s.yaw_rate * times
        xs = s.x + radius * (np.sin(th) - math.sin(s.heading))
        ys = s.y - radius * (np.cos(th) - math.cos(s.heading))
    return np.stack([xs, ys], axis=1)


def constant_velocity_baseline(sample: Sample, num_modes: int = DEFAULT_NUM_MODES) -> PredictionSet:
    """Hold the current speed and yaw rate; the single rollout is repeated for every mode."""
    path = constant_velocity_rollout(sample.target.current)
    return PredictionSet(np.repeat(path[None], num_modes, axis=0), np.full(num_modes, 1.0 / num_modes))
