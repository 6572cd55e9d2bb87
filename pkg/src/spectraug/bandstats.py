"""Radial band partition of amplitude spectra and per-band statistics.

Bins are assigned to bands by normalized radial frequency; the default
single boundary at 0.25 splits the spectrum into a low-frequency band
(index 0, containing DC) and a high-frequency band (index 1). Reports
carry per-volume, per-dataset-pooled, and cross-volume statistics so both
"variance of band means" and "mean per-bin variance" readings are
available to downstream analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fourier
from .errors import ValidationError
from .volume import AmplitudeField, Volume, normalized_radius


@dataclass(frozen=True)
class BandSpec:
    """Radial band boundaries (normalized, strictly increasing, in (0,1))."""

    boundaries: tuple[float, ...] = (0.25,)
    log_amplitude: bool = False

    def __post_init__(self):
        bounds = tuple(float(b) for b in self.boundaries)
        if not bounds:
            raise ValidationError("at least one band boundary is required")
        for b in bounds:
            if not (0.0 < b < 1.0):
                raise ValidationError(f"band boundary {b} outside (0, 1)")
        if any(hi <= lo for lo, hi in zip(bounds, bounds[1:])):
            raise ValidationError(f"band boundaries not strictly increasing: {bounds}")
        object.__setattr__(self, "boundaries", bounds)

    @property
    def num_bands(self) -> int:
        return len(self.boundaries) + 1

    def edges(self) -> list[tuple[float, float]]:
        """(lo, hi) per band; the last band is closed at the top."""
        cuts = (0.0, *self.boundaries, 1.0)
        return list(zip(cuts[:-1], cuts[1:]))


@dataclass(frozen=True)
class BandMoments:
    """Population mean/variance of amplitudes within one band."""

    index: int
    lo: float
    hi: float
    mean: float
    variance: float
    count: int


def band_partition(shape: tuple[int, ...], spec: BandSpec) -> np.ndarray:
    """Band index per centered bin; intervals are [lo, hi), last band closed.

    The normalized radius never reaches 1 (max is ~sqrt(d)/2), so the
    closed top band is a formality.
    """
    r = normalized_radius(shape)
    return np.searchsorted(np.asarray(spec.boundaries), r, side="right").astype(np.int64)


def band_variance(
    a: AmplitudeField, partition: np.ndarray, spec: BandSpec
) -> list[BandMoments]:
    """Per-band population mean/variance/count of the amplitude values."""
    if a.shape != partition.shape:
        raise ValidationError(
            f"amplitude shape {a.shape} != partition shape {partition.shape}"
        )
    values = np.log1p(a.data) if spec.log_amplitude else a.data
    flat = values.reshape(-1)
    labels = partition.reshape(-1)
    nb = spec.num_bands
    counts = np.bincount(labels, minlength=nb)
    sums = np.bincount(labels, weights=flat, minlength=nb)
    sq_sums = np.bincount(labels, weights=flat * flat, minlength=nb)
    out = []
    for i, (lo, hi) in enumerate(spec.edges()):
        n = int(counts[i])
        mean = sums[i] / n if n else 0.0
        var = sq_sums[i] / n - mean * mean if n else 0.0
        out.append(BandMoments(i, lo, hi, float(mean), float(max(var, 0.0)), n))
    return out


def _moments(values: np.ndarray) -> tuple[float, float, int]:
    n = values.size
    if n == 0:
        return 0.0, 0.0, 0
    mean = float(values.mean())
    return mean, float(max(values.var(), 0.0)), int(n)


def _volume_band_values(
    v: Volume, partition: np.ndarray, spec: BandSpec, dc_index: tuple[int, ...]
) -> tuple[list[dict], list[np.ndarray]]:
    """Per-band stats dicts for one volume plus the raw band value arrays."""
    amp, _ = fourier.decompose(fourier.fft_forward(v))
    values = np.log1p(amp.data) if spec.log_amplitude else amp.data
    band_values = []
    stats = []
    dc_linear = np.ravel_multi_index(dc_index, v.shape)
    flat = values.reshape(-1)
    labels = partition.reshape(-1)
    for i, (lo, hi) in enumerate(spec.edges()):
        sel = flat[labels == i]
        band_values.append(sel)
        mean, var, n = _moments(sel)
        entry = {
            "index": i, "lo": lo, "hi": hi,
            "mean": mean, "variance": var, "count": n,
        }
        if i == int(labels[dc_linear]):
            mask = labels == i
            mask[dc_linear] = False
            m2, v2, n2 = _moments(flat[mask])
            entry.update(
                mean_dc_excluded=m2, variance_dc_excluded=v2, count_dc_excluded=n2
            )
        stats.append(entry)
    return stats, band_values


def report_for_corpora(
    corpora: dict[str, list[Volume]], spec: BandSpec
) -> dict:
    """Band report over one or more named corpora sharing a grid shape.

    Per dataset: pooled per-band statistics plus per-volume detail.
    Across *all* volumes: per-band variance of per-volume means (the
    domain-shift signal) and the mean per-bin cross-volume variance.
    """
    all_volumes = [v for vols in corpora.values() for v in vols]
    if not all_volumes:
        raise ValidationError("band report needs at least one volume")
    shape = all_volumes[0].shape
    for v in all_volumes:
        if v.shape != shape:
            raise ValidationError(
                f"mixed shapes in band report: {shape} vs {v.shape} (id={v.id!r})"
            )
    partition = band_partition(shape, spec)
    dc_index = tuple(n // 2 for n in shape)

    report: dict = {
        "band_spec": {
            "boundaries": list(spec.boundaries),
            "log_amplitude": spec.log_amplitude,
        },
        "datasets": [],
    }
    # per-volume band means and stacked per-band values, across all corpora
    volume_means: list[list[float]] = []
    volume_values: list[list[np.ndarray]] = []

    for name, vols in corpora.items():
        entry: dict = {"id": name, "volume_count": len(vols), "volumes": []}
        pooled: list[list[np.ndarray]] = [[] for _ in range(spec.num_bands)]
        for v in vols:
            stats, band_values = _volume_band_values(v, partition, spec, dc_index)
            entry["volumes"].append({"id": v.id, "bands": stats})
            for i, sel in enumerate(band_values):
                pooled[i].append(sel)
            volume_means.append([s["mean"] for s in stats])
            volume_values.append(band_values)
        bands = []
        for i, (lo, hi) in enumerate(spec.edges()):
            allv = np.concatenate(pooled[i]) if pooled[i] else np.empty(0)
            mean, var, n = _moments(allv)
            band = {
                "index": i, "lo": lo, "hi": hi,
                "mean": mean, "variance": var, "count": n,
            }
            if i == 0:
                band.update(_dc_excluded_pooled(entry["volumes"], i))
            bands.append(band)
        entry["bands"] = bands
        report["datasets"].append(entry)

    report["cross_volume"] = _cross_volume(
        spec, volume_means, volume_values
    )
    return report


def _dc_excluded_pooled(volumes: list[dict], band: int) -> dict:
    """Pooled DC-excluded moments recomputed from per-volume entries."""
    total = 0
    s1 = 0.0
    s2 = 0.0
    for vol in volumes:
        b = vol["bands"][band]
        n = b.get("count_dc_excluded")
        if n is None:
            n = b["count"]
            mean, var = b["mean"], b["variance"]
        else:
            mean, var = b["mean_dc_excluded"], b["variance_dc_excluded"]
        total += n
        s1 += mean * n
        s2 += (var + mean * mean) * n
    if total == 0:
        return {"mean_dc_excluded": 0.0, "variance_dc_excluded": 0.0,
                "count_dc_excluded": 0}
    mean = s1 / total
    return {
        "mean_dc_excluded": mean,
        "variance_dc_excluded": max(s2 / total - mean * mean, 0.0),
        "count_dc_excluded": total,
    }


def _cross_volume(
    spec: BandSpec,
    volume_means: list[list[float]],
    volume_values: list[list[np.ndarray]],
) -> dict:
    bands = []
    for i, (lo, hi) in enumerate(spec.edges()):
        means = np.array([m[i] for m in volume_means])
        stacked = np.stack([vals[i] for vals in volume_values])
        per_bin_var = stacked.var(axis=0)
        bands.append({
            "index": i, "lo": lo, "hi": hi,
            "mean_of_volume_means": float(means.mean()),
            "variance_of_volume_means": float(means.var()),
            "mean_bin_variance": float(per_bin_var.mean()) if per_bin_var.size else 0.0,
        })
    return {"volume_count": len(volume_means), "bands": bands}


def dataset_report(
    volumes: list[Volume], spec: BandSpec, dataset_id: str = "dataset"
) -> dict:
    """Band report for a single corpus; see report_for_corpora."""
    return report_for_corpora({dataset_id: list(volumes)}, spec)
