"""Batch ingestion, preprocessing, augmentation and output writing.

Every (entry, copy) task is a pure function of the manifest entry and a
seed derived from (base seed, entry id, copy index), so batch results do
not depend on worker count or scheduling order. Labels are only ever
resampled (nearest-neighbor) and passed through; the augmentations touch
images alone.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import formats
from .errors import (
    DimensionMismatchError,
    UnsupportedFormatError,
    ValidationError,
)
from .manifest import Manifest
from .rass import RassParams, rass_augment
from .rms import RmsParams, rms_augment
from .seeds import derive_seed
from .volume import Volume

NORMALIZE_MODES = ("minmax", "zscore", "none")


@dataclass(frozen=True)
class SampleMeta:
    """Provenance needed to write an augmented sample back out."""

    format: str                       # "png" | "nifti"
    suffix: str                       # ".png" | ".nii" | ".nii.gz"
    affine: np.ndarray | None = None  # nifti only
    bitdepth: int | None = None       # png only
    label_dtype: np.dtype | None = None


@dataclass(frozen=True)
class SampleRecord:
    """One dataset sample: per-channel image volumes plus optional label."""

    id: str
    channels: tuple[Volume, ...]
    label: Volume | None
    meta: SampleMeta

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return self.channels[0].shape


def _suffix_of(path: Path) -> str:
    name = path.name.lower()
    if name.endswith(".nii.gz"):
        return ".nii.gz"
    return path.suffix.lower()


def load_volume(
    path: str | Path,
    modality: str,
    *,
    label_path: str | Path | None = None,
    id: str | None = None,
) -> SampleRecord:
    """Load a PNG (2d) or NIfTI-1 (3d) sample, channels split out.

    Multi-channel 2D images become one Volume per channel under a shared
    id; NIfTI affine and PNG bit depth are retained for write-back.
    """
    path = Path(path)
    sample_id = id if id is not None else path.name.split(".")[0]
    suffix = _suffix_of(path)

    if suffix == ".png":
        if modality != "2d":
            raise DimensionMismatchError(
                f"{path}: PNG input requires modality '2d', got {modality!r}"
            )
        arr, bitdepth = formats.read_png(path)
        planes = [arr] if arr.ndim == 2 else [arr[..., c] for c in range(arr.shape[2])]
        channels = tuple(
            Volume(data=p.astype(np.float64), id=sample_id) for p in planes
        )
        meta = SampleMeta(format="png", suffix=suffix, bitdepth=bitdepth)
    elif suffix in (".nii", ".nii.gz"):
        data, affine = formats.read_nifti(path)
        if data.ndim == 4 and data.shape[-1] == 1:
            data = data[..., 0]
        if modality != "3d" or data.ndim != 3:
            raise DimensionMismatchError(
                f"{path}: {data.ndim}D NIfTI does not match modality {modality!r}"
            )
        zooms = np.sqrt((affine[:3, :3] ** 2).sum(axis=0))
        channels = (
            Volume(data=data.astype(np.float64), spacing=tuple(zooms), id=sample_id),
        )
        meta = SampleMeta(format="nifti", suffix=suffix, affine=affine)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported input format {suffix!r}")

    label = None
    if label_path is not None:
        label, label_dtype = _load_label(Path(label_path), sample_id)
        if label.shape != channels[0].shape:
            raise ValidationError(
                f"label shape {label.shape} != image shape {channels[0].shape} "
                f"for id {sample_id!r}"
            )
        meta = replace(meta, label_dtype=label_dtype)
    return SampleRecord(id=sample_id, channels=channels, label=label, meta=meta)


def _load_label(path: Path, sample_id: str) -> tuple[Volume, np.dtype]:
    suffix = _suffix_of(path)
    if suffix == ".png":
        arr, _ = formats.read_png(path)
        if arr.ndim != 2:
            raise ValidationError(f"{path}: label PNG must be single-channel")
        raw = arr
    elif suffix in (".nii", ".nii.gz"):
        raw, _ = formats.read_nifti(path)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported label format {suffix!r}")
    if np.any(raw < 0) or not np.allclose(raw, np.round(raw)):
        raise ValidationError(f"{path}: labels must be nonnegative integers")
    return Volume(data=raw.astype(np.float64), id=sample_id), np.asarray(raw).dtype


def _resample_grid(data: np.ndarray, target: tuple[int, ...], order: int) -> np.ndarray:
    # endpoint-aligned sampling: output j maps to input j*(n_in-1)/(n_out-1)
    axes = []
    for n_in, n_out in zip(data.shape, target):
        if n_out > 1:
            axes.append(np.linspace(0.0, n_in - 1.0, n_out))
        else:
            axes.append(np.array([(n_in - 1.0) / 2.0]))
    coords = np.meshgrid(*axes, indexing="ij")
    return ndimage.map_coordinates(data, coords, order=order, mode="nearest")


def resample(r: SampleRecord, target_shape: tuple[int, ...]) -> SampleRecord:
    """Resample to target_shape: linear for images, nearest for labels.

    A no-op (bit-identical record) when the target equals the source.
    """
    target = tuple(int(n) for n in target_shape)
    if any(n < 1 for n in target):
        raise ValidationError(f"degenerate target shape {target}")
    if len(target) != len(r.spatial_shape):
        raise ValidationError(
            f"target rank {len(target)} != sample rank {len(r.spatial_shape)}"
        )
    if target == r.spatial_shape:
        return r
    channels = tuple(
        ch.with_data(_resample_grid(ch.data, target, order=1)) for ch in r.channels
    )
    label = r.label
    if label is not None:
        label = label.with_data(_resample_grid(label.data, target, order=0))
    return SampleRecord(id=r.id, channels=channels, label=label, meta=r.meta)


def normalize(v: Volume, mode: str) -> Volume:
    """Intensity normalization; constant volumes map to zero under both
    non-trivial modes."""
    if mode == "none":
        return v
    if mode == "minmax":
        lo, hi = float(v.data.min()), float(v.data.max())
        if hi == lo:
            return v.with_data(np.zeros_like(v.data))
        return v.with_data((v.data - lo) / (hi - lo))
    if mode == "zscore":
        std = float(v.data.std())
        if std == 0.0:
            return v.with_data(np.zeros_like(v.data))
        return v.with_data((v.data - v.data.mean()) / std)
    raise ValidationError(f"unknown normalize mode {mode!r}")


def _write_image(
    out_dir: Path, stem: str, channels: list[np.ndarray], meta: SampleMeta,
    normalize_mode: str,
) -> str:
    if meta.format == "png":
        arr = channels[0] if len(channels) == 1 else np.stack(channels, axis=-1)
        maxval = (1 << meta.bitdepth) - 1
        if normalize_mode == "minmax":
            ints = formats.quantize(arr, meta.bitdepth, scale=float(maxval))
        elif normalize_mode == "none":
            ints = formats.quantize(arr, meta.bitdepth, scale=1.0)
        else:
            # zscore has no natural integer range; rescale per image
            lo, hi = float(arr.min()), float(arr.max())
            scaled = (arr - lo) / (hi - lo) if hi > lo else np.zeros_like(arr)
            ints = formats.quantize(scaled, meta.bitdepth, scale=float(maxval))
        path = out_dir / f"{stem}{meta.suffix}"
        formats.write_png(path, ints, meta.bitdepth)
    else:
        path = out_dir / f"{stem}{meta.suffix}"
        formats.write_nifti(path, channels[0].astype(np.float32), meta.affine)
    return path.name


def _write_label(out_dir: Path, stem: str, label: Volume, meta: SampleMeta) -> str:
    dtype = meta.label_dtype if meta.label_dtype is not None else np.uint8
    data = label.data.astype(dtype)
    if meta.format == "png":
        path = out_dir / f"{stem}_label{meta.suffix}"
        bitdepth = 16 if np.dtype(dtype).itemsize > 1 else 8
        formats.write_png(path, data, bitdepth)
    else:
        path = out_dir / f"{stem}_label{meta.suffix}"
        formats.write_nifti(path, data, meta.affine)
    return path.name


def _process_task(
    entry, manifest: Manifest, rass_params: RassParams, rms_params: RmsParams,
    copy: int, base_seed: int, out_dir: Path, normalize_mode: str,
) -> dict:
    record = load_volume(
        entry.image_path, manifest.modality,
        label_path=entry.label_path, id=entry.id,
    )
    record = resample(record, manifest.target_shape)
    channels = [normalize(ch, normalize_mode) for ch in record.channels]

    rass_seed = derive_seed(base_seed, entry.id, copy, "rass")
    rms_seed = derive_seed(base_seed, entry.id, copy, "rms")
    per_copy_rass = replace(rass_params, seed=rass_seed)
    per_copy_rms = replace(rms_params, seed=rms_seed)

    # one delta field and one region set per image copy, shared by channels
    augmented = [rass_augment(ch, per_copy_rass) for ch in channels]
    augmented = [rms_augment(ch, per_copy_rms) for ch in augmented]

    stem = f"{entry.id}_{copy:03d}"
    image_file = _write_image(
        out_dir, stem, [ch.data for ch in augmented], record.meta, normalize_mode
    )
    label_file = None
    if record.label is not None:
        label_file = _write_label(out_dir, stem, record.label, record.meta)
    return {
        "copy": copy,
        "rass_seed": rass_seed,
        "rms_seed": rms_seed,
        "image": image_file,
        "label": label_file,
    }


def run_batch(
    manifest: Manifest,
    rass_params: RassParams,
    rms_params: RmsParams,
    copies: int,
    out_dir: str | Path,
    *,
    workers: int = 1,
    normalize_mode: str = "minmax",
    dry_run: bool = False,
) -> dict:
    """Augment every manifest entry `copies` times into out_dir.

    The base seed of the run is rass_params.seed; per-task seeds derive
    from (base seed, entry id, copy index). Per-entry failures are
    collected in the summary rather than aborting the batch. Returns the
    summary dict (also written to out_dir/summary.json unless dry_run).
    """
    if normalize_mode not in NORMALIZE_MODES:
        raise ValidationError(f"unknown normalize mode {normalize_mode!r}")
    if copies < 0:
        raise ValidationError(f"copies must be >= 0, got {copies}")
    out_dir = Path(out_dir)
    base_seed = rass_params.seed
    started = time.perf_counter()

    summary: dict = {
        "modality": manifest.modality,
        "target_shape": list(manifest.target_shape),
        "copies": copies,
        "base_seed": base_seed,
        "normalize": normalize_mode,
        "params": {
            "rass": {
                "alpha": rass_params.alpha,
                "beta": rass_params.beta,
                "gamma": rass_params.gamma,
            },
            "rms": {
                "num_regions": rms_params.num_regions,
                "min_size": list(rms_params.min_size),
                "max_size": list(rms_params.max_size),
            },
        },
        "dry_run": dry_run,
        "entries": [],
    }

    if dry_run:
        failed = 0
        for entry in sorted(manifest.entries, key=lambda e: e.id):
            problems = []
            if not entry.image_path.exists():
                problems.append(f"missing image: {entry.image_path}")
            if entry.label_path is not None and not entry.label_path.exists():
                problems.append(f"missing label: {entry.label_path}")
            status = "ok" if not problems else "failed"
            failed += bool(problems)
            summary["entries"].append(
                {"id": entry.id, "status": status,
                 "error": "; ".join(problems) or None, "copies": []}
            )
        summary["counts"] = {
            "entries": len(manifest.entries),
            "succeeded": len(manifest.entries) - failed,
            "failed": failed,
            "outputs": 0,
        }
        summary["elapsed_seconds"] = time.perf_counter() - started
        return summary

    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(entry, copy) for entry in manifest.entries for copy in range(copies)]
    results: dict[tuple[str, int], dict] = {}
    errors: dict[str, str] = {}

    def run_one(task):
        entry, copy = task
        key = (entry.id, copy)
        try:
            results[key] = _process_task(
                entry, manifest, rass_params, rms_params, copy,
                base_seed, out_dir, normalize_mode,
            )
        except Exception as exc:  # per-entry isolation, reported below
            errors[entry.id] = f"{type(exc).__name__}: {exc}"

    if workers <= 1:
        for task in tasks:
            run_one(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_one, tasks))

    outputs = 0
    failed = 0
    for entry in sorted(manifest.entries, key=lambda e: e.id):
        if entry.id in errors:
            failed += 1
            summary["entries"].append(
                {"id": entry.id, "status": "failed",
                 "error": errors[entry.id], "copies": []}
            )
            continue
        copies_done = [results[(entry.id, c)] for c in range(copies)]
        outputs += len(copies_done)
        summary["entries"].append(
            {"id": entry.id, "status": "ok", "error": None, "copies": copies_done}
        )
    summary["counts"] = {
        "entries": len(manifest.entries),
        "succeeded": len(manifest.entries) - failed,
        "failed": failed,
        "outputs": outputs,
    }
    summary["elapsed_seconds"] = time.perf_counter() - started
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary
