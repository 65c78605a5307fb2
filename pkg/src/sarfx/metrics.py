"""Quality and detection metrics: SSIM, MS-SSIM, ENL, |Delta-ENL|, ROC-AUC.

SSIM follows the windowed formulation (11x11 Gaussian window, sigma 1.5,
K1 = 0.01, K2 = 0.03) averaged over valid windows; MS-SSIM uses the standard
five-scale weighting with dyadic 2x downsampling. ENL is mean^2/variance of
amplitude pixels over a caller-chosen region; the same convention is applied
to both sides of |Delta-ENL|. AUC uses the Mann-Whitney rank statistic with
ties counting one half.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.stats import rankdata

from .raster import AmplitudeImage, RasterError, TamperMask

SSIM_WINDOW_SIZE = 11
SSIM_WINDOW_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Canonical five-scale weights, renormalized to sum exactly to 1.
_RAW_MSSSIM_WEIGHTS = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])
MSSSIM_WEIGHTS = _RAW_MSSSIM_WEIGHTS / _RAW_MSSSIM_WEIGHTS.sum()


class DegenerateRegionError(ValueError):
    """Region has too few pixels or zero variance for the requested statistic."""


@dataclass(frozen=True)
class FingerprintMap:
    """Real-valued per-pixel detector scores."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if values.ndim != 2 or min(values.shape) < 1:
            raise RasterError(f"fingerprint must be 2D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise RasterError("fingerprint contains NaN/Inf")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class MetricReport:
    """One evaluation row; AUC is present only when a fingerprint was scored."""

    ssim: float
    msssim: float
    enl_source: float
    enl_reference: float
    delta_enl_pct: float
    auc: float | None = None
    auc_polarity: str = "max"

    def __post_init__(self):
        if not -1.0 <= self.ssim <= 1.0 + 1e-12:
            raise ValueError(f"ssim out of range: {self.ssim}")
        if not -1.0 <= self.msssim <= 1.0 + 1e-12:
            raise ValueError(f"msssim out of range: {self.msssim}")
        if self.enl_source <= 0 or self.enl_reference <= 0:
            raise ValueError("ENL values must be positive")
        if self.delta_enl_pct < 0:
            raise ValueError("|Delta-ENL| must be nonnegative")
        if self.auc is not None and not 0.0 <= self.auc <= 1.0:
            raise ValueError(f"auc out of range: {self.auc}")

    def to_dict(self) -> dict:
        return {
            "ssim": self.ssim,
            "msssim": self.msssim,
            "enl_source": self.enl_source,
            "enl_reference": self.enl_reference,
            "delta_enl_pct": self.delta_enl_pct,
            "auc": self.auc,
            "auc_polarity": self.auc_polarity,
        }


def _as_plane(image, what: str) -> np.ndarray:
    if isinstance(image, AmplitudeImage):
        return image.values
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{what} must be a 2D plane")
    return arr


def _resolve_range(a, b, dynamic_range) -> float:
    if dynamic_range is not None:
        if not dynamic_range > 0:
            raise ValueError("dynamic_range must be positive")
        return float(dynamic_range)
    if isinstance(a, AmplitudeImage):
        return a.dynamic_range
    if isinstance(b, AmplitudeImage):
        return b.dynamic_range
    raise ValueError("dynamic_range is required for bare arrays")


def gaussian_window(size: int = SSIM_WINDOW_SIZE, sigma: float = SSIM_WINDOW_SIGMA) -> np.ndarray:
    """Unit-sum 2D Gaussian weighting window."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * (x / sigma) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


def _windowed(plane: np.ndarray, window: np.ndarray) -> np.ndarray:
    # Window is symmetric, so convolution equals correlation.
    return signal.fftconvolve(plane, window, mode="valid")


def _ssim_components(a: np.ndarray, b: np.ndarray, dynamic_range: float):
    window = gaussian_window()
    if a.shape[0] < SSIM_WINDOW_SIZE or a.shape[1] < SSIM_WINDOW_SIZE:
        raise ValueError(
            f"images of shape {a.shape} are smaller than the {SSIM_WINDOW_SIZE}x"
            f"{SSIM_WINDOW_SIZE} SSIM window"
        )
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2
    mu_a = _windowed(a, window)
    mu_b = _windowed(b, window)
    e_aa = _windowed(a * a, window)
    e_bb = _windowed(b * b, window)
    e_ab = _windowed(a * b, window)
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b
    luminance = (2 * mu_a * mu_b + c1) / (mu_a**2 + mu_b**2 + c1)
    cs = (2 * cov + c2) / (var_a + var_b + c2)
    return luminance, cs


def ssim(a, b, dynamic_range=None) -> float:
    """Mean SSIM over valid 11x11 Gaussian windows."""
    pa = _as_plane(a, "a")
    pb = _as_plane(b, "b")
    if pa.shape != pb.shape:
        raise ValueError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    lum, cs = _ssim_components(pa, pb, _resolve_range(a, b, dynamic_range))
    return float(np.mean(lum * cs))


def ms_ssim_scale_count(shape: tuple[int, int], max_scales: int = 5) -> int:
    """Number of dyadic scales that keep both dimensions >= the SSIM window."""
    scales = 0
    h, w = shape
    while scales < max_scales and min(h, w) >= SSIM_WINDOW_SIZE:
        scales += 1
        h, w = h // 2, w // 2
    return scales


def _downsample2(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    trimmed = plane[: 2 * (h // 2), : 2 * (w // 2)]
    return 0.25 * (
        trimmed[0::2, 0::2] + trimmed[1::2, 0::2] + trimmed[0::2, 1::2] + trimmed[1::2, 1::2]
    )


def ms_ssim(a, b, dynamic_range=None) -> float:
    """Multi-scale SSIM with the standard five-scale weighting.

    Contrast-structure terms are accumulated at the coarser scales and the
    full SSIM enters at the last scale; inputs too small for five scales use
    as many scales as fit (weights renormalized) and emit a warning.
    """
    pa = _as_plane(a, "a")
    pb = _as_plane(b, "b")
    if pa.shape != pb.shape:
        raise ValueError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    drange = _resolve_range(a, b, dynamic_range)
    n_scales = ms_ssim_scale_count(pa.shape)
    if n_scales == 0:
        raise ValueError(f"images of shape {pa.shape} support no MS-SSIM scale")
    if n_scales < MSSSIM_WEIGHTS.size:
        warnings.warn(
            f"MS-SSIM reduced to {n_scales} scales for shape {pa.shape}",
            stacklevel=2,
        )
    weights = MSSSIM_WEIGHTS[:n_scales] / MSSSIM_WEIGHTS[:n_scales].sum()

    score = 1.0
    for level in range(n_scales):
        lum, cs = _ssim_components(pa, pb, drange)
        if level == n_scales - 1:
            term = float(np.mean(lum * cs))
        else:
            term = float(np.mean(cs))
            pa = _downsample2(pa)
            pb = _downsample2(pb)
        score *= max(term, 0.0) ** weights[level]
    return float(score)


def enl(image, region=None) -> float:
    """Equivalent number of looks: mean^2 / variance of amplitude pixels."""
    plane = _as_plane(image, "image")
    if region is not None:
        sel = region.values if isinstance(region, TamperMask) else np.asarray(region)
        if sel.shape != plane.shape:
            raise ValueError(f"region shape {sel.shape} does not match image {plane.shape}")
        pixels = plane[sel.astype(bool)]
    else:
        pixels = plane.ravel()
    if pixels.size < 2:
        raise DegenerateRegionError("ENL needs at least 2 pixels")
    variance = float(pixels.var())
    if variance == 0.0:
        raise DegenerateRegionError("ENL is undefined on a zero-variance region")
    mean = float(pixels.mean())
    return mean * mean / variance


def delta_enl(attacked, pristine, region=None) -> float:
    """Absolute relative ENL difference, in percent of the pristine ENL."""
    enl_attacked = enl(attacked, region)
    enl_pristine = enl(pristine, region)
    return abs(enl_attacked - enl_pristine) / enl_pristine * 100.0


def auc_roc(fingerprint, mask: TamperMask, polarity: str = "max") -> float:
    """Mann-Whitney AUC of fingerprint scores against the tampering mask.

    polarity "max" picks the score orientation that maximizes the AUC
    (detector fingerprints have arbitrary sign); "positive" keeps the raw
    orientation.
    """
    if polarity not in ("max", "positive"):
        raise ValueError(f"unknown polarity {polarity!r}")
    scores = (
        fingerprint.values if isinstance(fingerprint, FingerprintMap) else np.asarray(fingerprint)
    ).ravel()
    if not np.all(np.isfinite(scores)):
        raise ValueError("fingerprint scores must be finite")
    labels = mask.values.ravel().astype(bool)
    if scores.size != labels.size:
        raise ValueError("fingerprint and mask sizes differ")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("mask must contain both classes")
    ranks = rankdata(scores)  # average ranks: ties contribute 0.5
    rank_sum = float(ranks[labels].sum())
    auc = (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    if polarity == "max":
        return float(max(auc, 1.0 - auc))
    return float(auc)


def evaluate_pair(
    source,
    reference,
    fingerprint=None,
    mask: TamperMask | None = None,
    enl_region=None,
    dynamic_range=None,
) -> MetricReport:
    """Bundle the full metric set for one (source, reference) image pair."""
    auc = None
    if fingerprint is not None:
        if mask is None:
            raise ValueError("AUC needs both a fingerprint and a mask")
        auc = auc_roc(fingerprint, mask, polarity="max")
    return MetricReport(
        ssim=ssim(source, reference, dynamic_range),
        msssim=ms_ssim(source, reference, dynamic_range),
        enl_source=enl(source, enl_region),
        enl_reference=enl(reference, enl_region),
        delta_enl_pct=delta_enl(source, reference, enl_region),
        auc=auc,
    )
