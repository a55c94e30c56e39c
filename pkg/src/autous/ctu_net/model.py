"""Full three-path classifier: gated fusion of path features plus the head."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..exceptions import ShapeError, ValidationError
from ..video_data import VideoSample
from .config import ModelConfig
from .paths import FastPath, FrequencyPath, SlowPath

GATE_TOLERANCE = 1e-4


@dataclass
class PathFeatures:
    slow: torch.Tensor | None  # [B, D]
    fast: torch.Tensor | None  # [B, D]
    gates: torch.Tensor  # [B, 2], rows sum to 1
    freq: torch.Tensor | None  # [B, d_freq]
    fused: torch.Tensor  # [B, D]


@dataclass
class Prediction:
    logits: torch.Tensor  # [B, C]
    probs: torch.Tensor  # [B, C]

    def numpy(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            self.logits.detach().cpu().numpy(),
            self.probs.detach().cpu().numpy(),
        )


def fuse(slow_features, fast_features, gates) -> torch.Tensor:
    """Convex combination of the two path features, weighted per sample."""
    gate_sum = gates.sum(dim=-1)
    if (gate_sum - 1.0).abs().max().item() > GATE_TOLERANCE:
        raise ValidationError(
            f"fusion gates must sum to 1, max deviation "
            f"{(gate_sum - 1.0).abs().max().item():.3e}"
        )
    return (
        gates[:, 0:1] * slow_features + gates[:, 1:2] * fast_features
    )


class CTUNet(nn.Module):
    """Slow/fast/frequency paths with gated fusion and a linear softmax head.

    Ablation semantics: removing the slow or fast path bypasses fusion with the
    surviving path's features (the frequency path still reports its gates);
    removing the frequency path freezes the gates at 0.5/0.5.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        config.validate()
        self.config = config
        t, h, w, cch = config.input_shape
        dim = config.embed_dim
        ablation = config.ablation

        self.slow = None if ablation == "no_slow" else SlowPath(config.slow, cch, dim)
        self.fast = (
            None if ablation == "no_fast" else FastPath(config.fast, cch, (h, w))
        )
        self.freq = None if ablation == "no_freq" else FrequencyPath(config.freq, cch)
        self.head = nn.Linear(dim, config.num_classes)

    def _check_input(self, x: torch.Tensor):
        expected = self.config.input_shape
        if x.ndim != 5:
            raise ShapeError(f"expected [B,T,H,W,C] input, got shape {tuple(x.shape)}")
        for axis, (got, want) in enumerate(zip(x.shape[1:], expected)):
            if got != want:
                names = ("T", "H", "W", "Cch")
                raise ShapeError(
                    f"input axis {names[axis]}={got} does not match "
                    f"configured {names[axis]}={want}"
                )

    def forward_features(self, x: torch.Tensor) -> PathFeatures:
        """``x`` is channels-last ``[B, T, H, W, Cch]`` in [0,1]."""
        self._check_input(x)
        x = x.permute(0, 4, 1, 2, 3)  # -> [B, C, T, H, W]
        b = x.shape[0]

        slow_features = self.slow(x) if self.slow is not None else None
        fast_features = self.fast(x) if self.fast is not None else None

        if self.freq is not None:
            gates, freq_features = self.freq(x)
        else:
            gates = torch.full((b, 2), 0.5, dtype=x.dtype, device=x.device)
            freq_features = None

        if slow_features is None:
            fused = fast_features
        elif fast_features is None:
            fused = slow_features
        else:
            fused = fuse(slow_features, fast_features, gates)

        return PathFeatures(
            slow=slow_features,
            fast=fast_features,
            gates=gates,
            freq=freq_features,
            fused=fused,
        )

    def forward(self, x: torch.Tensor) -> Prediction:
        fused = self.forward_features(x).fused
        logits = self.head(fused)
        return Prediction(logits=logits, probs=torch.softmax(logits, dim=-1))


# ---------------------------------------------------------------------------
# Deterministic initialization
# ---------------------------------------------------------------------------

def _trunc_normal_(tensor: torch.Tensor, std: float, generator: torch.Generator):
    # Sample in CDF space and invert, so truncation stays exact and seeded.
    bound = 2.0 * std
    low = 0.5 * (1.0 + math.erf((-bound / std) / math.sqrt(2.0)))
    high = 0.5 * (1.0 + math.erf((bound / std) / math.sqrt(2.0)))
    tensor.uniform_(2 * low - 1, 2 * high - 1, generator=generator)
    tensor.erfinv_()
    tensor.mul_(std * math.sqrt(2.0))
    tensor.clamp_(-bound, bound)


def init_parameters(model: CTUNet, seed: int) -> None:
    """Seeded init: fan-in normal for convs, truncated normal elsewhere,
    zeros for BN shift and all biases."""
    g = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for module in model.modules():
            if isinstance(module, (nn.Conv2d, nn.Conv3d)):
                fan_in = module.in_channels * math.prod(module.kernel_size)
                module.weight.normal_(0.0, math.sqrt(2.0 / fan_in), generator=g)
                if module.bias is not None:
                    module.bias.zero_()
            elif isinstance(module, nn.Linear):
                _trunc_normal_(module.weight, 0.02, g)
                module.bias.zero_()
            elif isinstance(module, (nn.BatchNorm3d, nn.LayerNorm)):
                module.weight.fill_(1.0)
                module.bias.zero_()
        if model.fast is not None:
            _trunc_normal_(model.fast.cls_token, 0.02, g)
            _trunc_normal_(model.fast.pos_embed, 0.02, g)


def build_model(config: ModelConfig) -> CTUNet:
    """Construct and seed-initialize; independent of global RNG state.

    Returned in eval mode so forward passes are deterministic; training
    code switches to train mode itself.
    """
    model = CTUNet(config)
    init_parameters(model, config.seed)
    model.eval()
    return model


def batch_from_samples(
    samples: list[VideoSample], dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack loader output into a channels-last batch plus a label vector."""
    frames = torch.from_numpy(np.stack([s.frames for s in samples])).to(dtype)
    labels = torch.tensor([s.class_id for s in samples], dtype=torch.long)
    return frames, labels


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())
