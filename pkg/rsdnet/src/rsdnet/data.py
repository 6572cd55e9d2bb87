"""Loader for the augmentation CLI's output directory.

The only contract with the upstream tool is its file interface: a
directory of augmented PNGs plus `summary.json` describing entries,
copies, and the declared target shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


class AugmentedDirError(RuntimeError):
    pass


@dataclass(frozen=True)
class AugmentedSample:
    id: str
    copy: int
    image: np.ndarray          # (H, W) float32 in [0, 1]
    label: np.ndarray | None   # (H, W) integer


@dataclass(frozen=True)
class AugmentedSet:
    target_shape: tuple[int, ...]
    samples: tuple[AugmentedSample, ...]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stack into (N, 1, H, W) images and binarized labels."""
        images = np.stack([s.image for s in self.samples])[:, None]
        labels = np.stack([
            (s.label > 0).astype(np.float32) for s in self.samples
        ])[:, None]
        return images, labels


def _read_gray_png(path: Path) -> np.ndarray:
    img = Image.open(path)
    img.load()
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise AugmentedDirError(f"{path}: expected single-channel PNG")
    return arr


def load_augmented_dir(augmented_dir: str | Path) -> AugmentedSet:
    """Read every successful (entry, copy) pair listed in summary.json."""
    root = Path(augmented_dir)
    summary_path = root / "summary.json"
    if not summary_path.exists():
        raise AugmentedDirError(f"no summary.json under {root}")
    summary = json.loads(summary_path.read_text())
    if summary.get("modality") != "2d":
        raise AugmentedDirError("only 2d augmented directories are supported")
    target_shape = tuple(int(n) for n in summary["target_shape"])

    samples = []
    for entry in summary["entries"]:
        if entry["status"] != "ok":
            continue
        for item in entry["copies"]:
            image = _read_gray_png(root / item["image"])
            scale = 65535.0 if image.dtype.itemsize > 1 else 255.0
            image = (image.astype(np.float32) / scale)
            if image.shape != target_shape:
                raise AugmentedDirError(
                    f"{item['image']}: shape {image.shape} != declared {target_shape}"
                )
            label = None
            if item.get("label"):
                label = _read_gray_png(root / item["label"]).astype(np.int64)
            samples.append(AugmentedSample(
                id=entry["id"], copy=int(item["copy"]), image=image, label=label,
            ))
    if not samples:
        raise AugmentedDirError(f"{root}: no usable samples in summary.json")
    return AugmentedSet(target_shape=target_shape, samples=tuple(samples))
