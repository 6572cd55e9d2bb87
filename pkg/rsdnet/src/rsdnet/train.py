"""Smoke training loop: a tiny encoder / bottleneck / decoder segmenter
running a few epochs on an augmented-output directory, recording losses
and verifying end-to-end shape compatibility."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .blocks import RsdBlock, RsdConfig
from .data import load_augmented_dir


@dataclass(frozen=True)
class ToyConfig:
    channels: int = 8
    groups: int = 4
    lr: float = 3e-3
    batch_size: int = 4
    seed: int = 0


class TinySegNet(nn.Module):
    """conv -> bottleneck block -> conv, single-channel in and out."""

    def __init__(self, cfg: ToyConfig):
        super().__init__()
        rsd_cfg = RsdConfig(channels=cfg.channels, groups=cfg.groups)
        self.encode = nn.Conv2d(1, cfg.channels, 3, padding=1)
        self.bottleneck = RsdBlock(rsd_cfg)
        self.decode = nn.Conv2d(cfg.channels, 1, 3, padding=1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = torch.relu(self.encode(x))
        return self.decode(h + self.bottleneck(h))


def smoke_train(
    augmented_dir: str | Path,
    epochs: int,
    toy_config: ToyConfig | None = None,
    metrics_path: str | Path | None = None,
) -> dict:
    """Train for a few epochs on the CLI's augmented outputs.

    Returns (and optionally writes) a metrics record with per-epoch mean
    losses. epochs=0 just validates loading and runs no steps.
    """
    cfg = toy_config or ToyConfig()
    torch.manual_seed(cfg.seed)

    dataset = load_augmented_dir(augmented_dir)
    images, labels = dataset.arrays()
    x = torch.from_numpy(images)
    y = torch.from_numpy(labels)

    model = TinySegNet(cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    loss_fn = nn.BCEWithLogitsLoss()

    losses: list[float] = []
    steps = 0
    for _ in range(epochs):
        epoch_losses = []
        for start in range(0, x.shape[0], cfg.batch_size):
            xb = x[start : start + cfg.batch_size]
            yb = y[start : start + cfg.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(xb), yb)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
            steps += 1
        losses.append(sum(epoch_losses) / len(epoch_losses))

    metrics = {
        "target_shape": list(dataset.target_shape),
        "samples": len(dataset.samples),
        "epochs": epochs,
        "steps": steps,
        "losses": losses,
        "initial_loss": losses[0] if losses else None,
        "final_loss": losses[-1] if losses else None,
        "seed": cfg.seed,
    }
    if metrics_path is not None:
        Path(metrics_path).write_text(json.dumps(metrics, indent=2) + "\n")
    return metrics
