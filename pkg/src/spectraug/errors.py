"""Exception hierarchy for spectraug."""


class SpectraugError(Exception):
    """Base class for all spectraug errors."""


class ValidationError(SpectraugError):
    """Input data or parameters violate a documented invariant."""


class SymmetryError(SpectraugError):
    """A spectrum handed to the inverse transform is not Hermitian enough
    to yield a real image (imaginary residual above the ceiling)."""


class ManifestError(SpectraugError):
    """A dataset manifest is malformed or inconsistent."""


class UnreadableFileError(SpectraugError):
    """A referenced file is missing or cannot be parsed."""


class UnsupportedFormatError(SpectraugError):
    """The file format is recognized but not supported."""


class DimensionMismatchError(SpectraugError):
    """File dimensionality does not match the declared modality."""
