"""Shared synthetic fixtures and independent oracles for the test suite.

Oracles here deliberately avoid the library's code paths (direct O(N^2)
DFT sums, nested-loop convolution, per-window statistics) so each test
compares two genuinely different routes to the same number.
"""

import numpy as np
from scipy import ndimage

from sarfx import AmplitudeImage, TransferFunction
from sarfx.sysid import freq_grid, nyquist_bins, raised_cosine_axis


def naive_dft2(x: np.ndarray) -> np.ndarray:
    """Direct O(N^2 M^2) unnormalized forward DFT, DC-centered."""
    x = np.asarray(x, dtype=np.complex128)
    h, w = x.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for ky in range(h):
        for kx in range(w):
            acc = 0.0 + 0.0j
            for ny in range(h):
                for nx in range(w):
                    acc += x[ny, nx] * np.exp(-2j * np.pi * (ky * ny / h + kx * nx / w))
            out[ky, kx] = acc
    return np.fft.fftshift(out)


def naive_idft2(spectrum_centered: np.ndarray) -> np.ndarray:
    """Direct inverse DFT with 1/(N*M) scaling from a DC-centered spectrum."""
    s = np.fft.ifftshift(np.asarray(spectrum_centered, dtype=np.complex128))
    h, w = s.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for ny in range(h):
        for nx in range(w):
            acc = 0.0 + 0.0j
            for ky in range(h):
                for kx in range(w):
                    acc += s[ky, kx] * np.exp(2j * np.pi * (ky * ny / h + kx * nx / w))
            out[ny, nx] = acc / (h * w)
    return out


def naive_convolve_reflect(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Nested-loop 2D convolution with symmetric (reflective) padding."""
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(plane, ((ph, ph), (pw, pw)), mode="symmetric")
    h, w = plane.shape
    out = np.zeros_like(plane, dtype=np.float64)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for u in range(kh):
                for v in range(kw):
                    acc += padded[i + u, j + v] * kernel[u, v]
            out[i, j] = acc
    return out


def raised_cosine_filter(n: int, fc_fraction: float) -> TransferFunction:
    """Separable raised-cosine low-pass with unit DC gain and a hard cutoff."""
    axis = raised_cosine_axis(freq_grid(n), 0.5, 0.5, fc_fraction * nyquist_bins(n))
    plane = np.outer(axis, axis)
    return TransferFunction(plane / plane.max(), "known")


def smooth_reflectivity(n: int, seed: int, level: float = 2000.0) -> AmplitudeImage:
    """Positive smooth synthetic scene with realistic 16-bit SLC pixel levels."""
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.standard_normal((n, n)), n / 24.0)
    base = (base - base.min()) / (base.max() - base.min())
    return AmplitudeImage((0.25 + base) * level)


def energy_residual_fingerprint(image: AmplitudeImage) -> np.ndarray:
    """Test-harness detector stand-in: local variance of the high-pass
    residual, normalized by squared local brightness."""
    v = image.values
    resid = v - ndimage.uniform_filter(v, 3)
    var = ndimage.uniform_filter(resid * resid, 9)
    mean = np.maximum(ndimage.uniform_filter(v, 9), 1e-9)
    return var / (mean * mean)
