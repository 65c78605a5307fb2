"""Complex speckle field generation and multiplicative injection.

Fields follow the fully-developed model: amplitude Rayleigh(sigma_s), phase
uniform on [0, 2pi), pixels mutually independent. The phase-only variant
pins every amplitude to 1 and is the pipeline default. Randomness comes from
a Philox counter-based stream keyed by the seed, so identical
(dims, mode, sigma_s, seed) always reproduce the same field bit-for-bit and
block-parallel generation stays possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import AmplitudeImage, ComplexImage, RasterError

MODE_FULL = "full"
MODE_PHASE_ONLY = "phase_only"

# E[S^2] = 2 sigma^2 = 1: injection preserves expected energy.
DEFAULT_SIGMA_S = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SpeckleField:
    """Complex speckle realization; re/im are float64 planes."""

    re: np.ndarray
    im: np.ndarray
    mode: str
    sigma_s: float | None = None

    def __post_init__(self):
        re = np.array(self.re, dtype=np.float64, order="C", copy=True)
        im = np.array(self.im, dtype=np.float64, order="C", copy=True)
        if re.shape != im.shape or re.ndim != 2:
            raise RasterError("speckle planes must be congruent 2D arrays")
        if self.mode not in (MODE_FULL, MODE_PHASE_ONLY):
            raise ValueError(f"unknown speckle mode {self.mode!r}")
        re.flags.writeable = False
        im.flags.writeable = False
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

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.re, self.im)


def generate_speckle(
    height: int,
    width: int,
    mode: str = MODE_PHASE_ONLY,
    sigma_s: float = DEFAULT_SIGMA_S,
    seed: int = 0,
) -> SpeckleField:
    """Draw a speckle field; deterministic given the seed.

    Draw order is fixed (phases first, then amplitudes) so the stream layout
    is part of the contract.
    """
    if mode not in (MODE_FULL, MODE_PHASE_ONLY):
        raise ValueError(f"unknown speckle mode {mode!r}")
    if mode == MODE_FULL and not sigma_s > 0:
        raise ValueError(f"sigma_s must be positive in full mode, got {sigma_s}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(height, width))
    if mode == MODE_PHASE_ONLY:
        amp = 1.0
        sigma = None
    else:
        # Rayleigh via inverse CDF of the uniform draw; u < 1 keeps the log finite.
        u = rng.random(size=(height, width))
        amp = sigma_s * np.sqrt(-2.0 * np.log1p(-u))
        sigma = float(sigma_s)
    return SpeckleField(amp * np.cos(phase), amp * np.sin(phase), mode, sigma)


def inject_speckle(amplitude: AmplitudeImage, field: SpeckleField) -> ComplexImage:
    """Element-wise product of a real amplitude with a complex speckle field."""
    if amplitude.shape != field.shape:
        raise RasterError(
            f"dimension mismatch: amplitude {amplitude.shape} vs field {field.shape}"
        )
    a = amplitude.values
    return ComplexImage(a * field.re, a * field.im)
