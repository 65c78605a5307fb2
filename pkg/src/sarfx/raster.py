"""Core raster types, invariant enforcement, binary container I/O, and tiling.

The three image kinds used throughout the package are thin immutable wrappers
around float64/uint8 numpy planes:

* :class:`ComplexImage`   -- full complex signal, stored as re/im planes
* :class:`AmplitudeImage` -- nonnegative real product (what gets released)
* :class:`TamperMask`     -- binary {0,1} plane marking spliced pixels

Files use a simple 32-byte header ("SARF" magic) followed by a row-major
little-endian payload; complex payloads are plane-sequential (all re, then
all im). Masks can additionally be exported as 8-bit PGM for eyeballing.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"SARF"
HEADER_SIZE = 32
_HEADER_FMT = "<4sBB10xQQ"  # magic, kind, dynamic_range_bits, reserved, height, width

KIND_AMPLITUDE_F64 = 1
KIND_COMPLEX_F64 = 2
KIND_MASK_U8 = 3

_KIND_NAMES = {
    KIND_AMPLITUDE_F64: "amplitude_f64",
    KIND_COMPLEX_F64: "complex_f64",
    KIND_MASK_U8: "mask_u8",
}


class RasterError(ValueError):
    """Malformed raster file or image invariant violation."""


def _locked(values, dtype) -> np.ndarray:
    """Return a C-contiguous read-only copy of ``values``."""
    arr = np.array(values, dtype=dtype, order="C", copy=True)
    arr.flags.writeable = False
    return arr


def _check_plane(arr: np.ndarray, name: str) -> None:
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise RasterError(f"{name} must be a 2D plane of at least 1x1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise RasterError(f"{name} contains NaN or Inf values")


@dataclass(frozen=True)
class ComplexImage:
    """2D complex raster, the full SAR signal; re/im are float64 planes."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = _locked(self.re, np.float64)
        im = _locked(self.im, np.float64)
        _check_plane(re, "re")
        _check_plane(im, "im")
        if re.shape != im.shape:
            raise RasterError(f"re/im shape mismatch: {re.shape} vs {im.shape}")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @property
    def height(self) -> int:
        return self.re.shape[0]

    @property
    def width(self) -> int:
        return self.re.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.re.shape

    def to_complex(self) -> np.ndarray:
        """Dense complex128 view of the signal (copy)."""
        return self.re + 1j * self.im

    def amplitude(self, dynamic_range_bits: int = 16) -> "AmplitudeImage":
        """|z| per pixel; always nonnegative by construction."""
        return AmplitudeImage(np.hypot(self.re, self.im), dynamic_range_bits)

    @classmethod
    def from_complex(cls, z) -> "ComplexImage":
        z = np.asarray(z, dtype=np.complex128)
        return cls(z.real, z.imag)


@dataclass(frozen=True)
class AmplitudeImage:
    """2D nonnegative real raster, the released SAR product."""

    values: np.ndarray
    dynamic_range_bits: int = 16

    def __post_init__(self):
        values = _locked(self.values, np.float64)
        _check_plane(values, "values")
        if np.any(values < 0):
            raise RasterError("amplitude values must be nonnegative")
        if not (1 <= int(self.dynamic_range_bits) <= 64):
            raise RasterError(f"unsupported dynamic_range_bits {self.dynamic_range_bits}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dynamic_range_bits", int(self.dynamic_range_bits))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def dynamic_range(self) -> float:
        """Full-scale value, 2**bits - 1."""
        return float(2 ** self.dynamic_range_bits - 1)

    def quantized(self) -> np.ndarray:
        """Rounded integer export; values must already fit the declared range."""
        full_scale = self.dynamic_range
        if np.any(self.values > full_scale):
            raise RasterError(
                f"values exceed 2^{self.dynamic_range_bits}-1; rescale before quantized export"
            )
        dtype = np.uint16 if self.dynamic_range_bits <= 16 else np.uint32
        return np.round(self.values).astype(dtype)


@dataclass(frozen=True)
class TamperMask:
    """Binary {0,1} plane marking manipulated pixels."""

    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if not np.isin(raw, (0, 1)).all():
            raise RasterError("mask values must be exactly 0 or 1")
        values = _locked(raw, np.uint8)
        _check_plane(values.astype(np.float64), "mask")
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class RasterHeader:
    """Decoded container header."""

    kind: int
    height: int
    width: int
    dynamic_range_bits: int

    @property
    def kind_name(self) -> str:
        return _KIND_NAMES[self.kind]


RasterImage = ComplexImage | AmplitudeImage | TamperMask


def _payload_bytes(kind: int, height: int, width: int) -> int:
    n = height * width
    if kind == KIND_AMPLITUDE_F64:
        return 8 * n
    if kind == KIND_COMPLEX_F64:
        return 16 * n
    if kind == KIND_MASK_U8:
        return n
    raise RasterError(f"unknown raster kind {kind}")


def write_raster(image: RasterImage, path) -> None:
    """Serialize an image to the SARF container at ``path``."""
    if isinstance(image, AmplitudeImage):
        kind, bits = KIND_AMPLITUDE_F64, image.dynamic_range_bits
        payload = image.values.astype("<f8").tobytes()
    elif isinstance(image, ComplexImage):
        kind, bits = KIND_COMPLEX_F64, 0
        payload = image.re.astype("<f8").tobytes() + image.im.astype("<f8").tobytes()
    elif isinstance(image, TamperMask):
        kind, bits = KIND_MASK_U8, 0
        payload = image.values.astype(np.uint8).tobytes()
    else:
        raise RasterError(f"cannot serialize object of type {type(image).__name__}")
    header = struct.pack(_HEADER_FMT, MAGIC, kind, bits, image.height, image.width)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_header(path) -> RasterHeader:
    """Decode and validate the 32-byte container header."""
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) != HEADER_SIZE:
        raise RasterError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, kind, bits, height, width = struct.unpack(_HEADER_FMT, raw)
    if magic != MAGIC:
        raise RasterError(f"{path}: bad magic {magic!r}")
    if kind not in _KIND_NAMES:
        raise RasterError(f"{path}: unknown kind {kind}")
    if height < 1 or width < 1:
        raise RasterError(f"{path}: degenerate dimensions {height}x{width}")
    return RasterHeader(kind, height, width, bits)


def read_raster(path) -> RasterImage:
    """Read a SARF container; round-trips :func:`write_raster` bit-exactly."""
    header = read_header(path)
    with open(path, "rb") as fh:
        fh.seek(HEADER_SIZE)
        payload = fh.read()
    expected = _payload_bytes(header.kind, header.height, header.width)
    if len(payload) != expected:
        raise RasterError(
            f"{path}: payload size mismatch (got {len(payload)} bytes, header implies {expected})"
        )
    shape = (header.height, header.width)
    if header.kind == KIND_AMPLITUDE_F64:
        values = np.frombuffer(payload, dtype="<f8").reshape(shape)
        if not np.all(np.isfinite(values)):
            raise RasterError(f"{path}: NaN/Inf in payload")
        bits = header.dynamic_range_bits if header.dynamic_range_bits else 16
        return AmplitudeImage(values, bits)
    if header.kind == KIND_COMPLEX_F64:
        planes = np.frombuffer(payload, dtype="<f8")
        n = header.height * header.width
        re = planes[:n].reshape(shape)
        im = planes[n:].reshape(shape)
        if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
            raise RasterError(f"{path}: NaN/Inf in payload")
        return ComplexImage(re, im)
    values = np.frombuffer(payload, dtype=np.uint8).reshape(shape)
    if not np.isin(values, (0, 1)).all():
        raise RasterError(f"{path}: mask payload has values outside {{0,1}}")
    return TamperMask(values)


def write_mask_pgm(mask: TamperMask, path) -> None:
    """Export a mask as binary PGM (0/255) for visual inspection."""
    with open(path, "wb") as fh:
        fh.write(f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii"))
        fh.write((mask.values * np.uint8(255)).tobytes())


def tile(image: RasterImage, tile_size: int, overlap: int):
    """Cut ``image`` into tiles of ``tile_size`` at stride ``tile_size - overlap``.

    Tiles are returned row-major as ``(tile, row_offset, col_offset)``; a
    trailing remainder smaller than a full tile is dropped.
    """
    if not 0 <= overlap < tile_size:
        raise RasterError(f"overlap must satisfy 0 <= overlap < tile_size, got {overlap}")
    if tile_size > image.height or tile_size > image.width:
        raise RasterError(
            f"tile size {tile_size} exceeds image dimensions {image.height}x{image.width}"
        )
    stride = tile_size - overlap
    n_rows = (image.height - tile_size) // stride + 1
    n_cols = (image.width - tile_size) // stride + 1

    def crop(r0, c0):
        sl = (slice(r0, r0 + tile_size), slice(c0, c0 + tile_size))
        if isinstance(image, ComplexImage):
            return ComplexImage(image.re[sl], image.im[sl])
        if isinstance(image, AmplitudeImage):
            return AmplitudeImage(image.values[sl], image.dynamic_range_bits)
        return TamperMask(image.values[sl])

    out = []
    for i in range(n_rows):
        for j in range(n_cols):
            r0, c0 = i * stride, j * stride
            out.append((crop(r0, c0), r0, c0))
    return out
