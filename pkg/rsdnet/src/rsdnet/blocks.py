"""Feature-reconstruction bottleneck block, toy scale.

Two stages, both shape-preserving on (B, C, H, W):

* spatial stage: group-normalization scaling factors rank channels by
  information content; a soft complementary gate splits the features into
  informative / less-informative parts, which are cross-fused (halves
  added crosswise and re-concatenated).
* channel stage: channels are divided, the rich part refined by
  depth-wise + point-wise convolutions and the cheap part by a point-wise
  convolution alone, then the two branch outputs are merged by a
  selective-kernel style softmax over pooled branch descriptors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RsdConfig:
    channels: int
    groups: int = 4
    gate_threshold: float = 0.5
    split_ratio: float = 0.5
    conv_bias: bool = True

    def __post_init__(self):
        if self.channels < 2:
            raise ConfigError(f"channels must be >= 2, got {self.channels}")
        if self.channels % self.groups != 0:
            raise ConfigError(
                f"channels ({self.channels}) not divisible by groups ({self.groups})"
            )
        if self.channels % 2 != 0:
            raise ConfigError("channels must be even for the cross-fusion split")
        if not (0.0 < self.gate_threshold < 1.0):
            raise ConfigError(f"gate_threshold must be in (0,1), got {self.gate_threshold}")
        rich = self.channels * self.split_ratio
        if not (0.0 < self.split_ratio < 1.0) or abs(rich - round(rich)) > 1e-9:
            raise ConfigError(
                f"split_ratio {self.split_ratio} does not divide {self.channels} channels"
            )

    @property
    def rich_channels(self) -> int:
        return round(self.channels * self.split_ratio)

    @property
    def cheap_channels(self) -> int:
        return self.channels - self.rich_channels


class SpatialReconstruct(nn.Module):
    """Separate features by per-channel importance, then cross-fuse.

    Importance weights come from the group-norm scaling factors,
    normalized to sum 1 and squashed to (0,1) around the gate threshold;
    uniform scaling factors with the default threshold give both parts an
    identical 0.5 share. The gate is soft and complementary so the whole
    feature space is preserved and every parameter stays trainable.
    """

    def __init__(self, cfg: RsdConfig):
        super().__init__()
        self.cfg = cfg
        self.gn = nn.GroupNorm(cfg.groups, cfg.channels, affine=True)

    def channel_gate(self) -> torch.Tensor:
        gamma = self.gn.weight.abs()
        w = gamma / gamma.sum()
        c = self.cfg.channels
        t = self.cfg.gate_threshold
        bias = math.log(t / (1.0 - t))
        return torch.sigmoid(c * (w - 1.0 / c) - bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != self.cfg.channels:
            raise ConfigError(
                f"expected (B, {self.cfg.channels}, H, W), got {tuple(x.shape)}"
            )
        y = self.gn(x)
        gate = self.channel_gate()[None, :, None, None]
        informative = gate * y
        residual = (1.0 - gate) * y
        i1, i2 = informative.chunk(2, dim=1)
        r1, r2 = residual.chunk(2, dim=1)
        return torch.cat([i1 + r2, i2 + r1], dim=1)


class ChannelRefine(nn.Module):
    """Divide channels, transform each part, merge with softmax weights.

    The rich part goes through depth-wise then point-wise convolution,
    the cheap part through a point-wise convolution; both map back to the
    full channel count. Global-pooled descriptors of the summed branches
    feed a shared bottleneck that emits per-branch, per-channel softmax
    weights for the final blend.
    """

    def __init__(self, cfg: RsdConfig):
        super().__init__()
        self.cfg = cfg
        rich, cheap = cfg.rich_channels, cfg.cheap_channels
        c = cfg.channels
        self.depthwise = nn.Conv2d(rich, rich, 3, padding=1, groups=rich,
                                   bias=cfg.conv_bias)
        self.rich_pointwise = nn.Conv2d(rich, c, 1, bias=cfg.conv_bias)
        self.cheap_pointwise = nn.Conv2d(cheap, c, 1, bias=cfg.conv_bias)
        hidden = max(c // 2, 4)
        self.descriptor = nn.Linear(c, hidden, bias=cfg.conv_bias)
        self.branch_logits = nn.Linear(hidden, 2 * c, bias=cfg.conv_bias)

    def branch_outputs(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        rich = x[:, : self.cfg.rich_channels]
        cheap = x[:, self.cfg.rich_channels :]
        y_rich = self.rich_pointwise(self.depthwise(rich))
        y_cheap = self.cheap_pointwise(cheap)
        return y_rich, y_cheap

    def branch_weights(self, y_rich, y_cheap) -> torch.Tensor:
        pooled = (y_rich + y_cheap).mean(dim=(2, 3))
        z = torch.relu(self.descriptor(pooled))
        logits = self.branch_logits(z).reshape(-1, 2, self.cfg.channels)
        return torch.softmax(logits, dim=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != self.cfg.channels:
            raise ConfigError(
                f"expected (B, {self.cfg.channels}, H, W), got {tuple(x.shape)}"
            )
        y_rich, y_cheap = self.branch_outputs(x)
        weights = self.branch_weights(y_rich, y_cheap)
        w_rich = weights[:, 0, :, None, None]
        w_cheap = weights[:, 1, :, None, None]
        return w_rich * y_rich + w_cheap * y_cheap


class RsdBlock(nn.Module):
    """Spatial reconstruction followed by channel refinement."""

    def __init__(self, cfg: RsdConfig):
        super().__init__()
        self.spatial = SpatialReconstruct(cfg)
        self.channel = ChannelRefine(cfg)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.channel(self.spatial(x))
