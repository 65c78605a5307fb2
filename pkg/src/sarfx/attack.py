"""Counter-forensic re-acquisition pipeline.

The attack chain: optional despeckling hook (identity by default) -> complex
speckle injection -> filtering through the system frequency response ->
amplitude extraction -> exact histogram matching against the input. A
synthetic-scene simulator producing ground-truth "pristine" complex data from
a known response is included for closure experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import AmplitudeImage, ComplexImage, RasterError
from .speckle import (
    DEFAULT_SIGMA_S,
    MODE_FULL,
    MODE_PHASE_ONLY,
    generate_speckle,
    inject_speckle,
)
from .spectral import Spectrum, forward_dft, inverse_dft
from .sysid import (
    STRATEGY_KNOWN,
    STRATEGIES,
    TransferFunction,
    estimate_transfer_function,
)

_DESPECKLERS = {"identity": lambda image: image}


def register_despeckler(name: str, fn) -> None:
    """Register a named despeckling hook: AmplitudeImage -> AmplitudeImage."""
    _DESPECKLERS[name] = fn


def get_despeckler(name: str):
    try:
        return _DESPECKLERS[name]
    except KeyError:
        raise KeyError(
            f"unknown despeckle hook {name!r}; registered: {sorted(_DESPECKLERS)}"
        ) from None


@dataclass(frozen=True)
class AttackConfig:
    """Everything needed to reproduce one attack run.

    The filter comes either from an explicit ``transfer_function`` or from
    estimation over ``filter_sources`` with ``filter_strategy``; exactly one
    of the two must be given.
    """

    seed: int
    speckle_mode: str = MODE_PHASE_ONLY
    sigma_s: float = DEFAULT_SIGMA_S
    transfer_function: TransferFunction | None = None
    filter_strategy: str | None = None
    filter_sources: tuple = ()
    smoothing_sigma: float | None = None
    smoothing_kernel: int | None = None
    histogram_match: bool = True
    despeckle_hook: str = "identity"

    def __post_init__(self):
        if self.speckle_mode not in (MODE_FULL, MODE_PHASE_ONLY):
            raise ValueError(f"unknown speckle mode {self.speckle_mode!r}")
        has_known = self.transfer_function is not None
        has_estimate = self.filter_strategy is not None or len(self.filter_sources) > 0
        if has_known == has_estimate:
            raise ValueError(
                "config must carry exactly one filter source: either a known "
                "transfer function or an estimation strategy with sources"
            )
        if has_estimate:
            if self.filter_strategy not in STRATEGIES or self.filter_strategy == STRATEGY_KNOWN:
                raise ValueError(f"invalid estimation strategy {self.filter_strategy!r}")
            if not self.filter_sources:
                raise ValueError("estimation requires at least one source image")
            object.__setattr__(self, "filter_sources", tuple(self.filter_sources))

    def resolve_filter(self) -> TransferFunction:
        if self.transfer_function is not None:
            return self.transfer_function
        return estimate_transfer_function(
            list(self.filter_sources),
            self.filter_strategy,
            sigma=self.smoothing_sigma,
            kernel_size=self.smoothing_kernel,
        )


@dataclass(frozen=True)
class AttackResult:
    """Attack output plus the intermediates needed for inspection."""

    attacked: AmplitudeImage
    speckled: ComplexImage
    filtered_amplitude: AmplitudeImage
    transfer_function: TransferFunction
    config: AttackConfig


def apply_system(signal: ComplexImage, h) -> ComplexImage:
    """Filter a complex signal through the response H (circular convolution).

    ``h`` is normally a validated TransferFunction; a bare DC-centered plane
    is also accepted so unnormalized responses can be applied directly.
    """
    values = h.values if isinstance(h, TransferFunction) else np.asarray(h, dtype=np.float64)
    if signal.shape != values.shape:
        raise RasterError(f"dimension mismatch: signal {signal.shape} vs H {values.shape}")
    spectrum = forward_dft(signal).values * values
    return inverse_dft(Spectrum(spectrum))


def histogram_match(source: AmplitudeImage, reference: AmplitudeImage) -> AmplitudeImage:
    """Exact rank mapping: pixel of rank k in source gets reference's rank-k value.

    Ties break by row-major index order; the output's sorted values equal the
    reference's sorted values exactly.
    """
    if source.values.size != reference.values.size:
        raise RasterError(
            f"pixel count mismatch: {source.values.size} vs {reference.values.size}"
        )
    flat = source.values.ravel()
    order = np.argsort(flat, kind="stable")
    matched = np.empty_like(flat)
    matched[order] = np.sort(reference.values, axis=None)
    return AmplitudeImage(matched.reshape(source.shape), reference.dynamic_range_bits)


def run_attack(image: AmplitudeImage, config: AttackConfig) -> AttackResult:
    """Run the full pipeline on an amplitude image; deterministic under the seed."""
    despeckle = get_despeckler(config.despeckle_hook)
    base = despeckle(image)
    field = generate_speckle(
        base.height, base.width, config.speckle_mode, config.sigma_s, config.seed
    )
    speckled = inject_speckle(base, field)
    h = config.resolve_filter()
    if h.shape != base.shape:
        raise RasterError(f"transfer function {h.shape} does not match image {base.shape}")
    filtered = apply_system(speckled, h)
    filtered_amplitude = filtered.amplitude(image.dynamic_range_bits)
    if config.histogram_match:
        attacked = histogram_match(filtered_amplitude, image)
    else:
        attacked = filtered_amplitude
    return AttackResult(attacked, speckled, filtered_amplitude, h, config)


def simulate_pristine(
    reflectivity: AmplitudeImage,
    h_true: TransferFunction,
    seed: int,
    sigma_s: float = DEFAULT_SIGMA_S,
) -> ComplexImage:
    """Synthesize ground-truth pristine complex data from a noise-free scene.

    Full-mode speckle is injected into the reflectivity and the result is
    filtered through the known system response; the amplitude of the output
    plays the role of a released pristine product in closure experiments.
    """
    field = generate_speckle(
        reflectivity.height, reflectivity.width, MODE_FULL, sigma_s, seed
    )
    return apply_system(inject_speckle(reflectivity, field), h_true)
