"""Architectural hyperparameters for the three-path classifier."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..exceptions import ValidationError

ABLATIONS = ("full", "no_slow", "no_fast", "no_freq")


@dataclass
class SlowPathConfig:
    stem_channels: int = 16
    block_channels: list[int] = field(default_factory=lambda: [32, 32, 64, 64])
    num_blocks: int = 4


@dataclass
class FastPathConfig:
    temporal_stride: int = 5
    patch_size: int = 4
    embed_dim: int = 64
    num_layers: int = 2
    num_heads: int = 1
    mlp_ratio: float = 4.0
    dropout_rate: float = 0.1


@dataclass
class FreqPathConfig:
    conv_channels: int = 8
    gate_hidden_dim: int = 32
    pool_grid: int = 4  # adaptive average pool target, d_freq = conv_channels * grid^2


@dataclass
class ModelConfig:
    num_classes: int = 5
    input_shape: tuple[int, int, int, int] = (40, 224, 224, 3)  # (T, H, W, Cch)
    slow: SlowPathConfig = field(default_factory=SlowPathConfig)
    fast: FastPathConfig = field(default_factory=FastPathConfig)
    freq: FreqPathConfig = field(default_factory=FreqPathConfig)
    ablation: str = "full"
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.slow, dict):
            self.slow = SlowPathConfig(**self.slow)
        if isinstance(self.fast, dict):
            self.fast = FastPathConfig(**self.fast)
        if isinstance(self.freq, dict):
            self.freq = FreqPathConfig(**self.freq)
        self.input_shape = tuple(self.input_shape)
        self.validate()

    def validate(self):
        t, h, w, cch = self.input_shape
        p = self.fast.patch_size
        if t < 1 or h < 8 or w < 8:
            raise ValidationError(f"input_shape {self.input_shape} too small")
        if cch not in (1, 3):
            raise ValidationError(f"channel count must be 1 or 3, got {cch}")
        if h % p != 0 or w % p != 0:
            raise ValidationError(
                f"H={h} and W={w} must be divisible by patch_size={p}"
            )
        if self.fast.temporal_stride < 1:
            raise ValidationError("temporal_stride must be >= 1")
        if self.slow.num_blocks < 1 or self.fast.num_layers < 1:
            raise ValidationError("num_blocks and num_layers must be >= 1")
        if len(self.slow.block_channels) != self.slow.num_blocks:
            raise ValidationError(
                f"block_channels has {len(self.slow.block_channels)} entries, "
                f"expected num_blocks={self.slow.num_blocks}"
            )
        if self.fast.embed_dim % self.fast.num_heads != 0:
            raise ValidationError(
                f"embed_dim={self.fast.embed_dim} not divisible by "
                f"num_heads={self.fast.num_heads}"
            )
        if self.ablation not in ABLATIONS:
            raise ValidationError(f"ablation must be one of {ABLATIONS}")
        if self.num_classes < 2:
            raise ValidationError("num_classes must be >= 2")

    @property
    def embed_dim(self) -> int:
        return self.fast.embed_dim

    @property
    def retained_frames(self) -> int:
        t = self.input_shape[0]
        alpha = self.fast.temporal_stride
        return (t + alpha - 1) // alpha  # ceil(T / alpha)

    @property
    def tokens_per_frame(self) -> int:
        _, h, w, _ = self.input_shape
        p = self.fast.patch_size
        return (h // p) * (w // p) + 1  # patches + cls

    @property
    def freq_feature_dim(self) -> int:
        return self.freq.conv_channels * self.freq.pool_grid**2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["input_shape"] = list(self.input_shape)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)

    @classmethod
    def tiny(cls, seed: int = 0, ablation: str = "full") -> "ModelConfig":
        """Desk-scale configuration used by tests and the synthetic benchmark."""
        return cls(
            num_classes=5,
            input_shape=(8, 32, 32, 1),
            slow=SlowPathConfig(stem_channels=8, block_channels=[16], num_blocks=1),
            fast=FastPathConfig(
                temporal_stride=2,
                patch_size=4,
                embed_dim=16,
                num_layers=1,
                num_heads=1,
                mlp_ratio=2.0,
                dropout_rate=0.1,
            ),
            freq=FreqPathConfig(conv_channels=4, gate_hidden_dim=16, pool_grid=4),
            ablation=ablation,
            seed=seed,
        )
