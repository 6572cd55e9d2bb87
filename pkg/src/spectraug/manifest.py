"""Dataset manifests for batch runs.

A manifest is a JSON file:

    {
      "modality": "2d" | "3d",
      "target_shape": [H, W] | [H, W, D],
      "entries": [
        {"id": "case01", "image_path": "img/case01.nii.gz",
         "label_path": "lbl/case01.nii.gz"},
        ...
      ]
    }

Relative paths resolve against the manifest's own directory. When
target_shape is omitted it defaults to 512 x 512 for "2d" and
144 x 144 x 144 for "3d".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ManifestError

DEFAULT_TARGET_SHAPES = {"2d": (512, 512), "3d": (144, 144, 144)}


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    image_path: Path
    label_path: Path | None = None


@dataclass(frozen=True)
class Manifest:
    modality: str
    target_shape: tuple[int, ...]
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        if self.modality not in ("2d", "3d"):
            raise ManifestError(f"modality must be '2d' or '3d', got {self.modality!r}")
        rank = 2 if self.modality == "2d" else 3
        shape = tuple(int(n) for n in self.target_shape)
        if len(shape) != rank:
            raise ManifestError(
                f"target_shape {shape} has rank {len(shape)}, "
                f"modality {self.modality} needs {rank}"
            )
        if any(n < 1 for n in shape):
            raise ManifestError(f"target_shape dims must be >= 1, got {shape}")
        object.__setattr__(self, "target_shape", shape)
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError(f"duplicate entry ids: {dupes}")


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}")
    for key in ("modality", "entries"):
        if key not in payload:
            raise ManifestError(f"manifest {path} missing key {key!r}")
    target_shape = payload.get("target_shape")
    if target_shape is None:
        target_shape = DEFAULT_TARGET_SHAPES.get(str(payload["modality"]))
        if target_shape is None:
            raise ManifestError(
                f"manifest {path}: modality {payload['modality']!r} has no "
                "default target_shape"
            )
    base = path.parent
    entries = []
    for i, raw in enumerate(payload["entries"]):
        if "id" not in raw or "image_path" not in raw:
            raise ManifestError(f"manifest entry #{i} needs 'id' and 'image_path'")
        label = raw.get("label_path")
        entries.append(
            ManifestEntry(
                id=str(raw["id"]),
                image_path=(base / raw["image_path"]).resolve(),
                label_path=(base / label).resolve() if label else None,
            )
        )
    return Manifest(
        modality=str(payload["modality"]),
        target_shape=tuple(target_shape),
        entries=tuple(entries),
    )
