"""Random amplitude spectrum synthesis.

Perturbs the Fourier amplitude spectrum of an image with per-frequency
Gaussian multipliers whose standard deviation grows with radial frequency,
then reconstructs the image from the perturbed amplitudes and the original
phases. High-frequency content is disturbed more than low-frequency
content; the DC multiplier keeps mean intensity in expectation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fourier
from .errors import ValidationError
from .seeds import unit_normals
from .volume import (
    AmplitudeField,
    Volume,
    mirror_index_grids,
    normalized_radius,
)

DEFAULT_ALPHA = 3.0
DEFAULT_BETA = 0.25
DEFAULT_GAMMA = 2.0


@dataclass(frozen=True)
class RassParams:
    """Hyperparameters of the amplitude perturbation.

    alpha scales the overall perturbation, gamma sets how fast it grows
    with frequency, beta is the frequency-independent floor, and seed
    drives all sampling.
    """

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")
        if self.gamma <= 0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")


@dataclass(frozen=True)
class SigmaField:
    """Per-frequency perturbation standard deviation, centered layout."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationError("sigma field must be finite and nonnegative")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass(frozen=True)
class DeltaField:
    """Sampled amplitude multipliers; nonnegative and centrally symmetric."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationError("delta field must be finite and nonnegative")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


def sigma_value(radius: float, params: RassParams) -> float:
    """Perturbation std dev at one normalized radial frequency."""
    if radius < 0:
        raise ValidationError(f"radius must be >= 0, got {radius}")
    return (2.0 * params.alpha * radius) ** params.gamma + params.beta


def sigma_field(shape: tuple[int, ...], params: RassParams) -> SigmaField:
    """Perturbation std dev at every centered frequency bin of `shape`.

    At centered offsets (m, n, p) the value is
    ``(2*alpha*sqrt((m^2+n^2+p^2)/(H^2+W^2+D^2)))**gamma + beta``;
    2D grids drop the third term. The DC bin is exactly beta.
    """
    if any(n < 1 for n in shape) or len(shape) not in (2, 3):
        raise ValidationError(f"invalid grid shape {shape}")
    r = normalized_radius(shape)
    return SigmaField(data=(2.0 * params.alpha * r) ** params.gamma + params.beta)


def sample_delta(sigma: SigmaField, seed: int) -> DeltaField:
    """Draw the multiplier field: one N(1, sigma^2) value per conjugate pair.

    Each bin pair (k, -k) shares a single Gaussian draw addressed by the
    pair's canonical linear index, so the field is centrally symmetric by
    construction (a real image stays real after perturbation) and identical
    for equal (shape, seed) regardless of evaluation order. Self-conjugate
    bins (DC, Nyquist) get one un-mirrored draw. Values are clamped to
    [0, inf) to preserve amplitude semantics.
    """
    shape = sigma.shape
    linear = np.arange(int(np.prod(shape)), dtype=np.uint64).reshape(shape)
    mirror_linear = linear[mirror_index_grids(shape)]
    canonical = np.minimum(linear, mirror_linear)
    z = unit_normals(seed, canonical)
    delta = 1.0 + sigma.data * z
    return DeltaField(data=np.maximum(delta, 0.0))


def perturb_amplitude(a: AmplitudeField, d: DeltaField) -> AmplitudeField:
    """Elementwise product of amplitudes and multipliers."""
    if a.shape != d.shape:
        raise ValidationError(
            f"amplitude shape {a.shape} != delta shape {d.shape}"
        )
    return AmplitudeField(data=a.data * d.data)


def rass_augment(v: Volume, params: RassParams) -> Volume:
    """Full amplitude-synthesis pipeline on one volume.

    Decompose, perturb the amplitudes with a freshly sampled delta field,
    recompose with the original phases, and invert. Deterministic given
    (volume, params); the mirrored delta keeps the output real.
    """
    spectrum = fourier.fft_forward(v)
    amp, phase = fourier.decompose(spectrum)
    sigma = sigma_field(v.shape, params)
    delta = sample_delta(sigma, params.seed)
    perturbed = perturb_amplitude(amp, delta)
    out_spec = fourier.recompose(perturbed, phase)
    return fourier.fft_inverse(out_spec, spacing=v.spacing, id=v.id)
