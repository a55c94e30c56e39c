"""The three feature paths: 3-D convolutional, space-time attention, spectral.

Tensors are channels-first internally ([B, C, T, H, W] for video); the public
model wrapper accepts channels-last frame blocks as produced by the loaders.
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F
from torch import nn

from ..exceptions import ValidationError
from .config import FastPathConfig, FreqPathConfig, ModelConfig, SlowPathConfig

LAPLACIAN_KERNEL = ((0.0, -1.0, 0.0), (-1.0, 4.0, -1.0), (0.0, -1.0, 0.0))


def attention(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor) -> torch.Tensor:
    """Scaled dot-product attention, ``softmax(q k^T / sqrt(d)) v``.

    Works on ``[..., n, d]`` stacks; the softmax runs over the key axis.
    """
    d = q.shape[-1]
    if d == 0:
        raise ValidationError("attention inner dimension must be >= 1")
    scores = q @ k.transpose(-2, -1) / math.sqrt(d)
    return torch.softmax(scores, dim=-1) @ v


def multi_head_attention(q, k, v, num_heads: int) -> torch.Tensor:
    """Split the embedding into heads, attend per head, re-concatenate.

    With ``num_heads == 1`` this is exactly :func:`attention`.
    """
    *lead, n, d = q.shape
    if d % num_heads != 0:
        raise ValidationError(f"dim {d} not divisible by {num_heads} heads")
    if num_heads == 1:
        return attention(q, k, v)
    dh = d // num_heads

    def split(x):
        return x.reshape(*lead, n, num_heads, dh).transpose(-3, -2)

    out = attention(split(q), split(k), split(v))
    return out.transpose(-3, -2).reshape(*lead, n, d)


def laplacian_highpass(x: torch.Tensor) -> torch.Tensor:
    """Fixed 3x3 Laplacian filter, applied per channel with zero padding."""
    c = x.shape[1]
    kernel = torch.tensor(LAPLACIAN_KERNEL, dtype=x.dtype, device=x.device)
    weight = kernel.expand(c, 1, 3, 3).contiguous()
    return F.conv2d(x, weight, padding=1, groups=c)


class ResidualBlock3D(nn.Module):
    """Two conv-BN stages with a shortcut added before the final ReLU."""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__()
        spatial_stride = 2 if out_channels != in_channels else 1
        stride = (1, spatial_stride, spatial_stride)
        self.conv1 = nn.Conv3d(
            in_channels, out_channels, 3, stride=stride, padding=1, bias=False
        )
        self.bn1 = nn.BatchNorm3d(out_channels)
        self.conv2 = nn.Conv3d(out_channels, out_channels, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm3d(out_channels)
        if spatial_stride != 1 or out_channels != in_channels:
            self.shortcut = nn.Sequential(
                nn.Conv3d(in_channels, out_channels, 1, stride=stride, bias=False),
                nn.BatchNorm3d(out_channels),
            )
        else:
            self.shortcut = nn.Identity()

    def forward(self, x):
        h = F.relu(self.bn1(self.conv1(x)))
        return F.relu(self.bn2(self.conv2(h)) + self.shortcut(x))


class SlowPath(nn.Module):
    """Conv stem + residual 3-D blocks, pooled and projected to the embed dim."""

    def __init__(self, cfg: SlowPathConfig, in_channels: int, embed_dim: int):
        super().__init__()
        self.stem_conv = nn.Conv3d(in_channels, cfg.stem_channels, 3, padding=1, bias=False)
        self.stem_bn = nn.BatchNorm3d(cfg.stem_channels)
        self.stem_pool = nn.MaxPool3d(kernel_size=(1, 2, 2), stride=(1, 2, 2))
        blocks = []
        prev = cfg.stem_channels
        for ch in cfg.block_channels:
            blocks.append(ResidualBlock3D(prev, ch))
            prev = ch
        self.blocks = nn.ModuleList(blocks)
        self.project = nn.Linear(prev, embed_dim)

    def forward(self, x):
        # x: [B, C, T, H, W]
        h = self.stem_pool(F.relu(self.stem_bn(self.stem_conv(x))))
        for block in self.blocks:
            h = block(h)
        pooled = h.mean(dim=(2, 3, 4))  # global average over (T, H, W)
        return self.project(pooled)


class SpaceTimeLayer(nn.Module):
    """Spatial attention per frame, temporal attention per token, then MLP."""

    def __init__(self, dim: int, num_heads: int, mlp_ratio: float, dropout: float):
        super().__init__()
        self.num_heads = num_heads
        self.spatial_q = nn.Linear(dim, dim)
        self.spatial_k = nn.Linear(dim, dim)
        self.spatial_v = nn.Linear(dim, dim)
        self.temporal_q = nn.Linear(dim, dim)
        self.temporal_k = nn.Linear(dim, dim)
        self.temporal_v = nn.Linear(dim, dim)
        hidden = int(dim * mlp_ratio)
        self.norm = nn.LayerNorm(dim)
        self.mlp = nn.Sequential(
            nn.Linear(dim, hidden), nn.GELU(), nn.Linear(hidden, dim)
        )
        self.dropout = nn.Dropout(dropout)

    def forward(self, z):
        # z: [B, T, N+1, D]
        b, t, n, d = z.shape

        flat = z.reshape(b * t, n, d)
        spatial = multi_head_attention(
            self.spatial_q(flat), self.spatial_k(flat), self.spatial_v(flat),
            self.num_heads,
        ).reshape(b, t, n, d)

        tok = spatial.permute(0, 2, 1, 3).reshape(b * n, t, d)
        temporal = multi_head_attention(
            self.temporal_q(tok), self.temporal_k(tok), self.temporal_v(tok),
            self.num_heads,
        ).reshape(b, n, t, d).permute(0, 2, 1, 3)

        return temporal + self.dropout(self.mlp(self.norm(temporal)))


class FastPath(nn.Module):
    """Temporally strided transformer over patch tokens; pooled cls output."""

    def __init__(self, cfg: FastPathConfig, in_channels: int, frame_hw: tuple[int, int]):
        super().__init__()
        self.stride = cfg.temporal_stride
        h, w = frame_hw
        self.num_patches = (h // cfg.patch_size) * (w // cfg.patch_size)
        self.patch_embed = nn.Conv2d(
            in_channels, cfg.embed_dim, cfg.patch_size, stride=cfg.patch_size
        )
        self.cls_token = nn.Parameter(torch.zeros(1, 1, 1, cfg.embed_dim))
        self.pos_embed = nn.Parameter(
            torch.zeros(self.num_patches + 1, cfg.embed_dim)
        )
        self.layers = nn.ModuleList(
            SpaceTimeLayer(cfg.embed_dim, cfg.num_heads, cfg.mlp_ratio, cfg.dropout_rate)
            for _ in range(cfg.num_layers)
        )

    def forward(self, x):
        # x: [B, C, T, H, W] -> keep every stride-th frame
        x = x[:, :, :: self.stride]
        b, c, t, h, w = x.shape
        frames = x.permute(0, 2, 1, 3, 4).reshape(b * t, c, h, w)
        patches = self.patch_embed(frames)  # [B*T', D, H/p, W/p]
        d = patches.shape[1]
        patches = patches.flatten(2).transpose(1, 2).reshape(b, t, self.num_patches, d)

        cls = self.cls_token.expand(b, t, 1, d)
        z = torch.cat([cls, patches], dim=2) + self.pos_embed
        for layer in self.layers:
            z = layer(z)
        return z[:, :, 0, :].mean(dim=1)  # average cls embedding over frames


class FrequencyPath(nn.Module):
    """Per-frame FFT magnitudes, filtered and pooled into fusion-gate logits."""

    def __init__(self, cfg: FreqPathConfig, in_channels: int):
        super().__init__()
        self.conv = nn.Conv2d(in_channels, cfg.conv_channels, 3, padding=1)
        self.pool_grid = cfg.pool_grid
        self.gate = nn.Sequential(
            nn.Linear(cfg.conv_channels * cfg.pool_grid**2, cfg.gate_hidden_dim),
            nn.ReLU(),
            nn.Linear(cfg.gate_hidden_dim, 2),
        )

    def spectral_features(self, x):
        # x: [B, C, T, H, W] -> [B, d_freq], averaged over time
        b, c, t, h, w = x.shape
        frames = x.permute(0, 2, 1, 3, 4).reshape(b * t, c, h, w)
        spectrum = torch.fft.rfft2(frames, dim=(-2, -1))
        magnitude = spectrum.abs()  # [B*T, C, H, W/2+1]
        upsampled = F.interpolate(
            magnitude, size=(h, w), mode="bilinear", align_corners=False
        )
        features = laplacian_highpass(self.conv(upsampled))
        features = F.max_pool2d(features, kernel_size=2)
        features = F.adaptive_avg_pool2d(features, self.pool_grid)
        per_frame = features.flatten(1).reshape(b, t, -1)
        return per_frame.mean(dim=1)

    def forward(self, x):
        freq_features = self.spectral_features(x)
        gates = torch.softmax(self.gate(freq_features), dim=-1)  # [B, 2]
        return gates, freq_features
