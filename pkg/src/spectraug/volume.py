"""Real-valued 2D/3D intensity grids and their frequency-domain companions.

All frequency-domain arrays use the *centered* layout: the zero-frequency
(DC) bin sits at index ``dim // 2`` along every axis, so "high frequency"
literally means "far from the grid center".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _as_float_grid(data: np.ndarray) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ValidationError(f"expected a 2D or 3D grid, got {arr.ndim}D")
    if any(n < 1 for n in arr.shape):
        raise ValidationError(f"all grid dims must be >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("grid contains non-finite values")
    return arr


@dataclass(frozen=True)
class Volume:
    """A real intensity grid with physical spacing and a stable identifier."""

    data: np.ndarray
    spacing: tuple[float, ...] | None = None
    id: str = ""

    def __post_init__(self):
        arr = _as_float_grid(self.data)
        object.__setattr__(self, "data", arr)
        spacing = self.spacing
        if spacing is None:
            spacing = (1.0,) * arr.ndim
        else:
            spacing = tuple(float(s) for s in spacing)
            if len(spacing) != arr.ndim:
                raise ValidationError(
                    f"spacing has {len(spacing)} entries for a {arr.ndim}D grid"
                )
        object.__setattr__(self, "spacing", spacing)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def with_data(self, data: np.ndarray) -> "Volume":
        """Same metadata, new intensities."""
        return Volume(data=data, spacing=self.spacing, id=self.id)


@dataclass(frozen=True)
class Spectrum:
    """Complex frequency grid in centered layout (DC at ``dim // 2``)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.complex128)
        if arr.ndim not in (2, 3):
            raise ValidationError(f"expected a 2D or 3D spectrum, got {arr.ndim}D")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("spectrum contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass(frozen=True)
class AmplitudeField:
    """Nonnegative per-frequency magnitudes, centered layout."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float_grid(self.data)
        if np.any(arr < 0):
            raise ValidationError("amplitude field has negative entries")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass(frozen=True)
class PhaseField:
    """Per-frequency angles in radians, range (-pi, pi], centered layout."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_float_grid(self.data)
        if np.any(arr <= -np.pi - 1e-12) or np.any(arr > np.pi + 1e-12):
            raise ValidationError("phase values outside (-pi, pi]")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


def centered_offsets(n: int) -> np.ndarray:
    """Signed frequency offsets along one axis of length n.

    Index i carries offset i - n//2, so offsets run from -floor(n/2)
    to ceil(n/2) - 1 and the DC bin sits at i = n//2.
    """
    return np.arange(n) - n // 2


def mirror_index_grids(shape: tuple[int, ...]) -> tuple[np.ndarray, ...]:
    """Per-axis index grids of the conjugate-mirror bin for every bin.

    In centered layout the mirror of index i along an axis of length n is
    (2*(n//2) - i) mod n; DC and (for even n) Nyquist bins map to themselves.
    """
    mirrors = [(2 * (n // 2) - np.arange(n)) % n for n in shape]
    return tuple(np.ix_(*mirrors))


def normalized_radius(shape: tuple[int, ...]) -> np.ndarray:
    """Grid of sqrt((m^2+n^2+p^2)/(H^2+W^2+D^2)) over centered offsets.

    The denominator uses the full axis lengths, so the maximum radius is
    about sqrt(d)/2 for a d-dimensional grid.
    """
    offsets = np.meshgrid(*(centered_offsets(n) for n in shape), indexing="ij")
    sq = sum(o.astype(np.float64) ** 2 for o in offsets)
    denom = float(sum(n**2 for n in shape))
    return np.sqrt(sq / denom)
