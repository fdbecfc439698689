"""Map encoder (CNN backbone -> 128-d) and trajectory encoder (Conv1d -> stacked LSTM -> 128-d)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .scene import HISTORY_STEPS

FEATURE_DIM = 128
BACKBONES = ("tiny_cnn", "full_residual_50")


@dataclass(frozen=True)
class EncoderParams:
    backbone: str = "tiny_cnn"
    conv_channels: int = 64
    conv_kernel: int = 3
    lstm_hidden: int = FEATURE_DIM
    lstm_layers: int = 2
    dropout: float = 0.2

    def __post_init__(self):
        if self.backbone not in BACKBONES:
            raise ValueError(f"unknown backbone {self.backbone!r}")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")
        if self.lstm_layers < 1:
            raise ValueError("need at least one LSTM layer")


class TinyCNN(nn.Module):
    """Four stride-2 conv layers and global average pooling -> 64-d."""

    out_dim = 64

    def __init__(self, channels=(8, 16, 32, 64)):
        super().__init__()
        layers, c_in = [], 3
        for c_out in channels:
            layers += [nn.Conv2d(c_in, c_out, 3, stride=2, padding=1), nn.ELU()]
            c_in = c_out
        self.body = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.out_dim = c_in

    def forward(self, x):
        return self.pool(self.body(x)).flatten(1)


def make_backbone(name: str) -> nn.Module:
    if name == "tiny_cnn":
        return TinyCNN()
    if name == "full_residual_50":
        from torchvision.models import resnet50

        net = resnet50(weights=None)
        net.fc = nn.Identity()
        net.out_dim = 2048
        return net
    raise ValueError(f"unknown backbone {name!r}")


class MapEncoder(nn.Module):
    def __init__(self, params: EncoderParams = EncoderParams(), image_shape=(240, 240, 3)):
        super().__init__()
        self.image_shape = tuple(image_shape)
        self.backbone = make_backbone(params.backbone)
        self.project = nn.Sequential(nn.Linear(self.backbone.out_dim, FEATURE_DIM), nn.ELU())

    def forward(self, raster: torch.Tensor) -> torch.Tensor:
        """``raster`` is (B, 3, H, W) with intensities scaled to [0, 1]."""
        h, w, c = self.image_shape
        if raster.dim() != 4 or tuple(raster.shape[1:]) != (c, h, w):
            raise ValueError(f"expected raster batch of shape (B, {c}, {h}, {w}), got {tuple(raster.shape)}")
        return self.project(self.backbone(raster))


def raster_to_tensor(raster: np.ndarray) -> torch.Tensor:
    """(H, W, 3) or (B, H, W, 3) uint8 -> (B, 3, H, W) float in [0, 1]."""
    t = torch.as_tensor(np.asarray(raster))
    if t.dim() == 3:
        t = t.unsqueeze(0)
    return t.permute(0, 3, 1, 2).float().div_(255.0)


class TrackEncoder(nn.Module):
    """Conv1d over time (same-length padding) followed by stacked LSTMs.

    Returns the top layer's final hidden state.  Steps flagged invalid are
    zeroed before the convolution.
    """

    def __init__(self, in_features: int = 5, seq_len: int = HISTORY_STEPS + 1,
                 params: EncoderParams = EncoderParams()):
        super().__init__()
        self.seq_len = seq_len
        self.in_features = in_features
        self.conv = nn.Conv1d(in_features, params.conv_channels, params.conv_kernel,
                              padding=params.conv_kernel // 2)
        self.act = nn.ELU()
        self.lstm = nn.LSTM(params.conv_channels, params.lstm_hidden, num_layers=params.lstm_layers,
                            dropout=params.dropout if params.lstm_layers > 1 else 0.0, batch_first=True)

    def forward(self, x: torch.Tensor, valid: torch.Tensor | None = None) -> torch.Tensor:
        if x.dim() != 3 or x.shape[1] != self.seq_len or x.shape[2] != self.in_features:
            raise ValueError(
                f"expected (B, {self.seq_len}, {self.in_features}) sequence, got {tuple(x.shape)}")
        if valid is not None:
            x = x * valid.unsqueeze(-1).to(x.dtype)
        h = self.act(self.conv(x.transpose(1, 2))).transpose(1, 2)
        _, (h_n, _) = self.lstm(h)
        return h_n[-1]


@torch.no_grad()
def encode_map(encoder: MapEncoder, raster: np.ndarray) -> np.ndarray:
    """Encode one H x W x 3 raster in evaluation mode."""
    was_training = encoder.training
    encoder.eval()
    try:
        dtype = next(encoder.parameters()).dtype
        return encoder(raster_to_tensor(raster).to(dtype))[0].numpy()
    finally:
        encoder.train(was_training)


@torch.no_grad()
def encode_track(encoder: TrackEncoder, features: np.ndarray, valid: np.ndarray | None = None) -> np.ndarray:
    """Encode one (T, F) feature sequence in evaluation mode."""
    was_training = encoder.training
    encoder.eval()
    try:
        dtype = next(encoder.parameters()).dtype
        x = torch.as_tensor(np.asarray(features), dtype=dtype).unsqueeze(0)
        v = None if valid is None else torch.as_tensor(np.asarray(valid, dtype=bool)).unsqueeze(0)
        return encoder(x, v)[0].numpy()
    finally:
        encoder.train(was_training)
