"""Discrete Fourier transform contract, spectrum smoothing, and radial profiling.

Convention, fixed once for the whole package so golden values are portable:
no scaling on the forward transform, 1/(N*M) on the inverse, and spectra are
stored DC-centered (bin ``(H//2, W//2)`` is DC).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import AmplitudeImage, ComplexImage, RasterError


@dataclass(frozen=True)
class Spectrum:
    """DC-centered complex spectrum with the dimensions of its source image."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, order="C", copy=True)
        if values.ndim != 2 or min(values.shape) < 1:
            raise RasterError(f"spectrum must be a 2D plane, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise RasterError("spectrum contains NaN or Inf values")
        values.flags.writeable = False
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

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class RadialProfile:
    """Mean squared spectral magnitude per integer-radius annulus around DC."""

    bin_centers: np.ndarray
    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.bin_centers, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if not (centers.shape == values.shape == counts.shape) or centers.ndim != 1:
            raise RasterError("profile arrays must be 1D and congruent")
        if np.any(counts < 0) or np.any(values < 0):
            raise RasterError("profile counts and values must be nonnegative")
        if centers.size and not np.allclose(np.diff(centers), 1.0):
            raise RasterError("profile bins must be contiguous with unit width")
        for name, arr in (("bin_centers", centers), ("values", values), ("counts", counts)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _as_complex_plane(image) -> np.ndarray:
    if isinstance(image, ComplexImage):
        return image.to_complex()
    if isinstance(image, AmplitudeImage):
        return image.values.astype(np.complex128)
    return np.asarray(image, dtype=np.complex128)


def forward_dft(image) -> Spectrum:
    """Unnormalized forward 2D DFT of an image, returned DC-centered."""
    plane = _as_complex_plane(image)
    return Spectrum(np.fft.fftshift(np.fft.fft2(plane)))


def inverse_dft(spectrum: Spectrum) -> ComplexImage:
    """Inverse 2D DFT with 1/(N*M) scaling; exact inverse of :func:`forward_dft`."""
    z = np.fft.ifft2(np.fft.ifftshift(spectrum.values))
    return ComplexImage(z.real, z.imag)


def central_flip(values: np.ndarray) -> np.ndarray:
    """Map a DC-centered plane through f -> -f (index negation modulo size)."""
    a = np.fft.ifftshift(np.asarray(values))
    flipped = np.roll(a[::-1, ::-1], (1, 1), axis=(0, 1))
    return np.fft.fftshift(flipped)


def gaussian_kernel_1d(sigma: float, size: int) -> np.ndarray:
    """Unit-sum sampled Gaussian of odd length ``size``."""
    if size % 2 != 1:
        raise ValueError(f"kernel size must be odd, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = np.arange(size, dtype=np.float64) - size // 2
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def smooth_spectrum(mag: np.ndarray, sigma: float, kernel_size: int) -> np.ndarray:
    """Convolve a magnitude plane with a unit-sum Gaussian, reflective padding.

    Same-size output; the separable kernel keeps values nonnegative and, on
    interior-supported inputs, preserves total mass.
    """
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 2:
        raise ValueError(f"magnitude plane must be 2D, got shape {mag.shape}")
    if np.any(mag < 0):
        raise ValueError("magnitude plane must be nonnegative")
    k = gaussian_kernel_1d(sigma, kernel_size)
    out = ndimage.convolve1d(mag, k, axis=0, mode="reflect")
    out = ndimage.convolve1d(out, k, axis=1, mode="reflect")
    return np.maximum(out, 0.0)


def azimuthal_profile(spectrum: Spectrum) -> RadialProfile:
    """Mean of |S|^2 per annulus of rounded Euclidean radius from DC.

    Ring-mean normalization, so a flat (white) spectrum yields a flat profile.
    """
    h, w = spectrum.shape
    cy, cx = h // 2, w // 2
    ry = np.arange(h, dtype=np.float64)[:, None] - cy
    rx = np.arange(w, dtype=np.float64)[None, :] - cx
    radius = np.rint(np.hypot(ry, rx)).astype(np.int64)
    power = np.abs(spectrum.values) ** 2
    counts = np.bincount(radius.ravel())
    sums = np.bincount(radius.ravel(), weights=power.ravel())
    values = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    centers = np.arange(counts.size, dtype=np.float64)
    return RadialProfile(centers, values, counts)


def profile_to_csv(profile: RadialProfile) -> str:
    """Render a profile as ``radius,mean_sq_magnitude,count`` CSV text."""
    lines = ["radius,mean_sq_magnitude,count"]
    for r, v, c in zip(profile.bin_centers, profile.values, profile.counts):
        lines.append(f"{int(r)},{float(v)!r},{int(c)}")
    return "\n".join(lines) + "\n"
