"""Random mask shuffle: permute pixel values inside randomly placed
axis-aligned regions, leaving everything outside untouched.

Regions are selected first (positions and sizes), then the values inside
each region are rearranged by a uniform random permutation. Overlapping
regions compose sequentially in list order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .seeds import derive_seed, philox_rng
from .volume import Volume


@dataclass(frozen=True)
class RmsParams:
    """Region count, per-axis size bounds (inclusive), and seed."""

    num_regions: int
    min_size: tuple[int, ...]
    max_size: tuple[int, ...]
    seed: int = 0

    def __post_init__(self):
        if self.num_regions < 0:
            raise ValidationError(f"num_regions must be >= 0, got {self.num_regions}")
        mn = tuple(int(s) for s in self.min_size)
        mx = tuple(int(s) for s in self.max_size)
        if len(mn) != len(mx):
            raise ValidationError("min_size and max_size have different ranks")
        for lo, hi in zip(mn, mx):
            if lo < 1:
                raise ValidationError(f"min_size entries must be >= 1, got {lo}")
            if lo > hi:
                raise ValidationError(f"min_size {lo} exceeds max_size {hi}")
        object.__setattr__(self, "min_size", mn)
        object.__setattr__(self, "max_size", mx)


@dataclass(frozen=True)
class MaskRegion:
    """An axis-aligned block: origin plus size per axis."""

    origin: tuple[int, ...]
    size: tuple[int, ...]

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(o, o + s) for o, s in zip(self.origin, self.size))

    def validate_within(self, shape: tuple[int, ...]) -> None:
        if len(self.origin) != len(shape):
            raise ValidationError(
                f"region rank {len(self.origin)} != grid rank {len(shape)}"
            )
        for o, s, n in zip(self.origin, self.size, shape):
            if o < 0 or s < 1 or o + s > n:
                raise ValidationError(
                    f"region origin={self.origin} size={self.size} "
                    f"out of bounds for shape {shape}"
                )


def default_params_for_shape(
    shape: tuple[int, ...], num_regions: int = 4, seed: int = 0,
    min_frac: float = 1.0 / 16.0, max_frac: float = 0.25,
) -> RmsParams:
    """House defaults: region sides between min_frac and max_frac of each
    axis, rounded up to at least one cell."""
    mn = tuple(max(1, int(round(n * min_frac))) for n in shape)
    mx = tuple(max(1, int(round(n * max_frac))) for n in shape)
    return RmsParams(num_regions=num_regions, min_size=mn, max_size=mx, seed=seed)


def select_regions(shape: tuple[int, ...], params: RmsParams) -> list[MaskRegion]:
    """Draw num_regions random blocks inside `shape`.

    Per region, each axis gets a size uniform in [min_size, max_size] and
    an origin uniform over the valid placement range; regions may overlap.
    Deterministic given (shape, params).
    """
    if len(params.min_size) != len(shape):
        raise ValidationError(
            f"size bounds rank {len(params.min_size)} != grid rank {len(shape)}"
        )
    for lo, n in zip(params.min_size, shape):
        if lo > n:
            raise ValidationError(f"min_size {lo} exceeds image dim {n}")
    rng = philox_rng(params.seed, stream=derive_seed("rms-select"))
    regions: list[MaskRegion] = []
    for _ in range(params.num_regions):
        size = tuple(
            int(rng.integers(lo, min(hi, n) + 1))
            for lo, hi, n in zip(params.min_size, params.max_size, shape)
        )
        origin = tuple(int(rng.integers(0, n - s + 1)) for s, n in zip(size, shape))
        regions.append(MaskRegion(origin=origin, size=size))
    return regions


def shuffle_regions(v: Volume, regions: list[MaskRegion], seed: int) -> Volume:
    """Permute values inside each region, in list order.

    Each region's permutation comes from its own (seed, region index)
    stream, so the result is independent of how the work is scheduled.
    Values outside all regions are bit-identical to the input.
    """
    for region in regions:
        region.validate_within(v.shape)
    out = v.data.copy()
    for i, region in enumerate(regions):
        block = out[region.slices()]
        flat = block.reshape(-1)
        perm = philox_rng(seed, stream=i).permutation(flat.size)
        out[region.slices()] = flat[perm].reshape(block.shape)
    return v.with_data(out)


def rms_augment(v: Volume, params: RmsParams) -> Volume:
    """Select regions from params and shuffle them with a derived seed."""
    regions = select_regions(v.shape, params)
    return shuffle_regions(v, regions, derive_seed(params.seed, "rms-shuffle"))
