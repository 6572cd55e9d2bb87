"""On-disk image formats: PNG (8/16-bit) and single-file NIfTI-1 (.nii/.nii.gz).

The NIfTI support is deliberately minimal: little/big-endian single-file
volumes with the common scalar dtypes, slope/intercept scaling, and
sform/qform/pixdim affines. Written files always carry an sform and a
zero gzip mtime so byte-identical reruns stay byte-identical.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import UnreadableFileError, UnsupportedFormatError

# --------------------------------------------------------------------------
# PNG

_PNG_MODES = {"L": 8, "I": 16, "I;16": 16, "RGB": 8}


def read_png(path: str | Path) -> tuple[np.ndarray, int]:
    """Load a PNG as an integer array (H, W) or (H, W, 3) plus its bit depth."""
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise UnreadableFileError(f"no such file: {path}")
    except Exception as exc:
        raise UnreadableFileError(f"cannot read PNG {path}: {exc}")
    if img.mode == "P":
        img = img.convert("RGB")
    if img.mode not in _PNG_MODES:
        raise UnsupportedFormatError(
            f"PNG mode {img.mode!r} not supported (want 8/16-bit gray or RGB)"
        )
    arr = np.asarray(img)
    return arr, _PNG_MODES[img.mode]


def write_png(path: str | Path, data: np.ndarray, bitdepth: int) -> None:
    """Write an integer array as an 8- or 16-bit PNG."""
    if bitdepth == 8:
        img = Image.fromarray(data.astype(np.uint8))  # L or RGB by shape
    elif bitdepth == 16:
        if data.ndim == 3:
            raise UnsupportedFormatError("16-bit RGB PNG output not supported")
        img = Image.fromarray(data.astype(np.uint16))  # I;16
    else:
        raise UnsupportedFormatError(f"unsupported PNG bit depth {bitdepth}")
    img.save(path, format="PNG")


def quantize(data: np.ndarray, bitdepth: int, scale: float = 1.0) -> np.ndarray:
    """Map floats to the integer range of `bitdepth` with round-half-even."""
    maxval = (1 << bitdepth) - 1
    ints = np.rint(np.asarray(data, dtype=np.float64) * scale)
    return np.clip(ints, 0, maxval).astype(np.uint16 if bitdepth == 16 else np.uint8)


# --------------------------------------------------------------------------
# NIfTI-1

_NIFTI_FMT = "<i10s18sihBB8h3fhhhh8ffffhBBffffii80s24shh6f4f4f4f16s4s"
_NIFTI_DTYPES = {
    2: np.uint8, 4: np.int16, 8: np.int32, 16: np.float32, 64: np.float64,
    256: np.int8, 512: np.uint16, 768: np.uint32, 1024: np.int64,
}
_NIFTI_CODES = {np.dtype(v): k for k, v in _NIFTI_DTYPES.items()}


def _open_maybe_gzip(path: Path, mode: str):
    if path.suffix == ".gz":
        # fixed mtime keeps rerun outputs byte-identical
        return gzip.GzipFile(path, mode=mode, mtime=0)
    return open(path, mode)


def _qform_affine(quat: tuple, pixdim: tuple) -> np.ndarray:
    b, c, d, ox, oy, oz = quat
    a = float(np.sqrt(max(0.0, 1.0 - (b * b + c * c + d * d))))
    rot = np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - b * b - c * c],
    ])
    qfac = -1.0 if pixdim[0] == -1.0 else 1.0
    zooms = np.array([pixdim[1], pixdim[2], qfac * pixdim[3]])
    affine = np.eye(4)
    affine[:3, :3] = rot * zooms
    affine[:3, 3] = (ox, oy, oz)
    return affine


def read_nifti(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a single-file NIfTI-1 volume; returns (data, 4x4 affine).

    Slope/intercept scaling is applied when present.
    """
    path = Path(path)
    if not path.exists():
        raise UnreadableFileError(f"no such file: {path}")
    try:
        with _open_maybe_gzip(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}")
    if len(raw) < 352:
        raise UnreadableFileError(f"{path}: truncated NIfTI file")

    header = raw[:348]
    order = "<"
    sizeof_hdr = struct.unpack("<i", header[:4])[0]
    if sizeof_hdr != 348:
        if struct.unpack(">i", header[:4])[0] == 348:
            order = ">"
        else:
            raise UnreadableFileError(f"{path}: not a NIfTI-1 file")
    fields = struct.unpack(order + _NIFTI_FMT[1:], header)
    magic = fields[-1]
    if magic[:3] not in (b"n+1", b"ni1"):
        raise UnreadableFileError(f"{path}: bad NIfTI magic {magic!r}")

    dim = fields[7:15]
    ndim = dim[0]
    if not (1 <= ndim <= 4):
        raise UnsupportedFormatError(f"{path}: unsupported dim[0]={ndim}")
    shape = tuple(int(n) for n in dim[1 : ndim + 1])
    datatype = fields[19]
    if datatype not in _NIFTI_DTYPES:
        raise UnsupportedFormatError(f"{path}: unsupported NIfTI datatype {datatype}")
    dt = np.dtype(_NIFTI_DTYPES[datatype]).newbyteorder(order)
    pixdim = fields[22:30]
    vox_offset = int(fields[30])
    scl_slope, scl_inter = fields[31], fields[32]
    qform_code, sform_code = fields[44], fields[45]
    quat = fields[46:52]
    srow = np.array(fields[52:64], dtype=np.float64).reshape(3, 4)

    count = int(np.prod(shape))
    body = raw[vox_offset : vox_offset + count * dt.itemsize]
    if len(body) < count * dt.itemsize:
        raise UnreadableFileError(f"{path}: data section truncated")
    data = np.frombuffer(body, dtype=dt, count=count).reshape(shape, order="F")
    if scl_slope not in (0.0, 1.0) or scl_inter != 0.0:
        slope = scl_slope if scl_slope != 0.0 else 1.0
        data = data.astype(np.float64) * slope + scl_inter

    if sform_code > 0:
        affine = np.vstack([srow, [0.0, 0.0, 0.0, 1.0]])
    elif qform_code > 0:
        affine = _qform_affine(quat, pixdim)
    else:
        affine = np.diag([pixdim[1], pixdim[2], pixdim[3] if ndim >= 3 else 1.0, 1.0])
    return np.ascontiguousarray(data), affine


def write_nifti(path: str | Path, data: np.ndarray, affine: np.ndarray | None = None) -> None:
    """Write an array as single-file NIfTI-1 with the given sform affine."""
    path = Path(path)
    arr = np.asarray(data)
    if arr.dtype not in _NIFTI_CODES:
        arr = arr.astype(np.float32)
    if affine is None:
        affine = np.eye(4)
    affine = np.asarray(affine, dtype=np.float64)
    zooms = np.sqrt((affine[:3, :3] ** 2).sum(axis=0))
    zooms[zooms == 0] = 1.0

    dim = [arr.ndim] + list(arr.shape) + [1] * (7 - arr.ndim)
    pixdim = [1.0] + [float(z) for z in zooms[: arr.ndim]] + [1.0] * (7 - arr.ndim)
    header = struct.pack(
        _NIFTI_FMT,
        348,                      # sizeof_hdr
        b"", b"", 0, 0, 0, 0,     # unused legacy fields
        *dim,
        0.0, 0.0, 0.0, 0,         # intent
        _NIFTI_CODES[arr.dtype],  # datatype
        arr.dtype.itemsize * 8,   # bitpix
        0,                        # slice_start
        *pixdim,
        352.0,                    # vox_offset
        1.0, 0.0,                 # scl_slope / scl_inter
        0, 0, 2,                  # slice_end, slice_code, xyzt_units (mm)
        0.0, 0.0, 0.0, 0.0, 0, 0, # cal/slice/toffset/glmax/glmin
        b"spectraug", b"",
        0, 1,                     # qform_code, sform_code
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        *affine[0, :], *affine[1, :], *affine[2, :],
        b"", b"n+1\x00",
    )
    assert len(header) == 348
    with _open_maybe_gzip(path, "wb") as fh:
        fh.write(header)
        fh.write(b"\x00\x00\x00\x00")  # extension flag
        fh.write(np.asfortranarray(arr).tobytes(order="F"))
