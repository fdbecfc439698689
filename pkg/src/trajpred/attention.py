"""Learnable relative-distance attention and object-area attention over neighbours.

Distance scores are f_i = alpha1 / (W_dist * max(|q - k_i|, eps)) and area
scores are f_i = alpha2 * W * (q_area / k_area_i).  Both are softmaxed over
the valid neighbours and used to pool the neighbours' track encodings; the
two pooled vectors are concatenated into the interaction feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

EPSILON = 1e-6


def inverse_softplus(y: float) -> float:
    return y + math.log(-math.expm1(-y))


@dataclass
class AttentionParams:
    """Scalar parameters in their raw (unconstrained) form; W_dist = softplus(w_dist_raw)."""

    alpha1: float = 1.0
    w_dist_raw: float = inverse_softplus(1.0)
    alpha2: float = 1.0
    w_area: float = 1.0
    epsilon: float = EPSILON

    @property
    def w_dist(self) -> float:
        return float(F.softplus(torch.tensor(self.w_dist_raw, dtype=torch.float64)))


@dataclass
class NeighborSet:
    k_pos: np.ndarray  # (N, 2) neighbour positions at t0
    k_area: np.ndarray  # (N,)
    v: np.ndarray  # (N, D) neighbour track encodings
    mask: np.ndarray | None = None  # (N,) validity
    q_pos: np.ndarray = field(default_factory=lambda: np.zeros(2))
    q_area: float = 1.0

    def tensors(self):
        n = len(self.k_pos)
        mask = np.ones(n, dtype=bool) if self.mask is None else np.asarray(self.mask, dtype=bool)
        v = np.asarray(self.v, dtype=np.float64)
        v = v.reshape(n, v.shape[-1] if v.ndim == 2 else -1) if n else np.zeros((0, v.shape[-1] if v.ndim == 2 else 128))
        as_t = lambda a: torch.as_tensor(np.asarray(a, dtype=np.float64))  # noqa: E731
        return (as_t(self.q_pos).reshape(1, 2), as_t(np.asarray(self.k_pos).reshape(n, 2))[None],
                torch.tensor([float(self.q_area)], dtype=torch.float64), as_t(self.k_area).reshape(1, n),
                as_t(v)[None], torch.as_tensor(mask)[None])


def masked_softmax(scores: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Softmax over the last axis restricted to ``mask``; rows with no valid entry give zeros."""
    any_valid = mask.any(dim=-1, keepdim=True)
    logits = scores.masked_fill(~mask, float("-inf"))
    logits = torch.where(any_valid, logits, torch.zeros_like(logits))
    return torch.softmax(logits, dim=-1) * mask.to(scores.dtype)


def distance_weights(q_pos, k_pos, mask, alpha1, w_dist, eps: float = EPSILON) -> torch.Tensor:
    """(B, 2), (B, N, 2), (B, N) -> (B, N) distance-attention weights."""
    dist = torch.linalg.vector_norm(k_pos - q_pos.unsqueeze(1), dim=-1)
    # Padded entries are replaced before the division so they cannot poison gradients.
    dist = torch.where(mask, dist.clamp_min(eps), torch.ones_like(dist))
    return masked_softmax(alpha1 / (w_dist * dist), mask)


def area_weights(q_area, k_area, mask, alpha2, w_area) -> torch.Tensor:
    """(B,), (B, N), (B, N) -> (B, N) area-attention weights."""
    if bool(((k_area <= 0) & mask).any()) or bool((q_area <= 0).any()):
        raise ValueError("agent areas must be positive")
    k_safe = torch.where(mask, k_area, torch.ones_like(k_area))
    return masked_softmax(alpha2 * w_area * (q_area.unsqueeze(-1) / k_safe), mask)


def pool(weights: torch.Tensor, values: torch.Tensor) -> torch.Tensor:
    """(B, N), (B, N, D) -> (B, D) weighted sum."""
    return torch.einsum("bn,bnd->bd", weights, values)


def fuse(h_dist, h_area):
    """Concatenate the distance- and area-pooled features along the last axis."""
    if h_dist.shape != h_area.shape:
        raise ValueError(f"cannot fuse features of shapes {tuple(h_dist.shape)} and {tuple(h_area.shape)}")
    if isinstance(h_dist, np.ndarray):
        return np.concatenate([h_dist, h_area], axis=-1)
    return torch.cat([h_dist, h_area], dim=-1)


class InteractionAttention(nn.Module):
    def __init__(self, use_distance: bool = True, use_area: bool = True, init: AttentionParams = AttentionParams()):
        super().__init__()
        self.use_distance = use_distance
        self.use_area = use_area
        self.epsilon = init.epsilon
        self.alpha1 = nn.Parameter(torch.tensor(float(init.alpha1)))
        self.w_dist_raw = nn.Parameter(torch.tensor(float(init.w_dist_raw)))
        self.alpha2 = nn.Parameter(torch.tensor(float(init.alpha2)))
        self.w_area = nn.Parameter(torch.tensor(float(init.w_area)))

    @property
    def w_dist(self) -> torch.Tensor:
        return F.softplus(self.w_dist_raw)

    def params(self) -> AttentionParams:
        return AttentionParams(float(self.alpha1), float(self.w_dist_raw), float(self.alpha2),
                               float(self.w_area), self.epsilon)

    def dist_weights(self, q_pos, k_pos, mask):
        return distance_weights(q_pos, k_pos, mask, self.alpha1, self.w_dist, self.epsilon)

    def area_weights(self, q_area, k_area, mask):
        return area_weights(q_area, k_area, mask, self.alpha2, self.w_area)

    def forward(self, q_pos, k_pos, q_area, k_area, values, mask) -> torch.Tensor:
        """Returns the (B, 2D) interaction feature; a disabled branch contributes zeros."""
        zeros = values.new_zeros(values.shape[0], values.shape[-1])
        h_dist = pool(self.dist_weights(q_pos, k_pos, mask), values) if self.use_distance else zeros
        h_area = pool(self.area_weights(q_area, k_area, mask), values) if self.use_area else zeros
        return fuse(h_dist, h_area)


def _module(params: AttentionParams) -> InteractionAttention:
    return InteractionAttention(init=params).double()


@torch.no_grad()
def dist_scores(neighbors: NeighborSet, params: AttentionParams = AttentionParams()) -> np.ndarray:
    """Distance-attention weights for one target; empty when no neighbour is valid."""
    q_pos, k_pos, _, _, _, mask = neighbors.tensors()
    if not bool(mask.any()):
        return np.zeros(0)
    return _module(params).dist_weights(q_pos, k_pos, mask)[0].numpy()


@torch.no_grad()
def area_scores(neighbors: NeighborSet, params: AttentionParams = AttentionParams()) -> np.ndarray:
    _, _, q_area, k_area, _, mask = neighbors.tensors()
    if not bool(mask.any()):
        return np.zeros(0)
    return _module(params).area_weights(q_area, k_area, mask)[0].numpy()


@torch.no_grad()
def dist_att(neighbors: NeighborSet, params: AttentionParams = AttentionParams()) -> np.ndarray:
    q_pos, k_pos, _, _, v, mask = neighbors.tensors()
    return pool(_module(params).dist_weights(q_pos, k_pos, mask), v)[0].numpy()


@torch.no_grad()
def area_att(neighbors: NeighborSet, params: AttentionParams = AttentionParams()) -> np.ndarray:
    _, _, q_area, k_area, v, mask = neighbors.tensors()
    return pool(_module(params).area_weights(q_area, k_area, mask), v)[0].numpy()
