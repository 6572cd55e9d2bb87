"""spectraug: deterministic frequency-domain augmentation for medical images.

Library surface: Fourier amplitude/phase machinery, frequency-dependent
amplitude perturbation, random in-region pixel shuffling, radial band
statistics, and a manifest-driven batch pipeline. See the `spectraug`
command for the CLI.
"""

from .bandstats import (
    BandMoments,
    BandSpec,
    band_partition,
    band_variance,
    dataset_report,
    report_for_corpora,
)
from .errors import (
    DimensionMismatchError,
    ManifestError,
    SpectraugError,
    SymmetryError,
    UnreadableFileError,
    UnsupportedFormatError,
    ValidationError,
)
from .fourier import decompose, fft_forward, fft_inverse, hermitian_asymmetry, recompose
from .manifest import Manifest, ManifestEntry, load_manifest
from .pipeline import SampleRecord, load_volume, normalize, resample, run_batch
from .rass import (
    DeltaField,
    RassParams,
    SigmaField,
    perturb_amplitude,
    rass_augment,
    sample_delta,
    sigma_field,
    sigma_value,
)
from .rms import MaskRegion, RmsParams, rms_augment, select_regions, shuffle_regions
from .seeds import derive_seed
from .volume import AmplitudeField, PhaseField, Spectrum, Volume

__version__ = "0.1.0"

__all__ = [
    "AmplitudeField", "BandMoments", "BandSpec", "DeltaField",
    "DimensionMismatchError", "Manifest", "ManifestEntry", "ManifestError",
    "MaskRegion", "PhaseField", "RassParams", "RmsParams", "SampleRecord",
    "SigmaField", "SpectraugError", "Spectrum", "SymmetryError",
    "UnreadableFileError", "UnsupportedFormatError", "ValidationError",
    "Volume", "band_partition", "band_variance", "dataset_report",
    "decompose", "derive_seed", "fft_forward", "fft_inverse",
    "hermitian_asymmetry", "load_manifest", "load_volume", "normalize",
    "perturb_amplitude", "rass_augment", "recompose", "report_for_corpora",
    "resample", "rms_augment", "run_batch", "sample_delta", "select_regions",
    "shuffle_regions", "sigma_field", "sigma_value",
]
