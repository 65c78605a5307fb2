import numpy as np
import pytest
from scipy import stats

from sarfx import (
    AmplitudeImage,
    DEFAULT_SIGMA_S,
    MODE_FULL,
    MODE_PHASE_ONLY,
    RasterError,
    Spectrum,
    azimuthal_profile,
    generate_speckle,
    inject_speckle,
)


def test_phase_only_unit_modulus():
    field = generate_speckle(8, 8, MODE_PHASE_ONLY, seed=42)
    assert np.abs(field.magnitude() - 1.0).max() < 1e-12


def test_full_mode_rayleigh_mean():
    field = generate_speckle(1000, 1000, MODE_FULL, sigma_s=DEFAULT_SIGMA_S, seed=7)
    expected = DEFAULT_SIGMA_S * np.sqrt(np.pi / 2.0)  # ~0.8862
    assert field.magnitude().mean() == pytest.approx(expected, abs=0.003)


def test_full_mode_amplitude_variance():
    field = generate_speckle(1000, 1000, MODE_FULL, sigma_s=DEFAULT_SIGMA_S, seed=8)
    expected = (2.0 - np.pi / 2.0) * DEFAULT_SIGMA_S**2
    assert field.magnitude().var() == pytest.approx(expected, rel=0.01)


def test_phase_uniformity_ks():
    field = generate_speckle(1000, 1000, MODE_FULL, seed=9)
    phases = np.mod(np.arctan2(field.im, field.re), 2.0 * np.pi)
    result = stats.kstest(phases.ravel(), stats.uniform(loc=0, scale=2 * np.pi).cdf)
    assert result.pvalue > 0.01


def test_determinism_bit_identical():
    a = generate_speckle(32, 16, MODE_FULL, sigma_s=0.9, seed=1234)
    b = generate_speckle(32, 16, MODE_FULL, sigma_s=0.9, seed=1234)
    assert np.array_equal(a.re, b.re) and np.array_equal(a.im, b.im)
    c = generate_speckle(32, 16, MODE_FULL, sigma_s=0.9, seed=1235)
    assert not np.array_equal(a.re, c.re)


def test_mode_and_sigma_validation():
    with pytest.raises(ValueError, match="sigma_s"):
        generate_speckle(4, 4, MODE_FULL, sigma_s=0.0, seed=0)
    with pytest.raises(ValueError, match="mode"):
        generate_speckle(4, 4, "bogus", seed=0)


def test_inject_zero_amplitude_gives_zero():
    field = generate_speckle(6, 6, MODE_PHASE_ONLY, seed=3)
    out = inject_speckle(AmplitudeImage(np.zeros((6, 6))), field)
    assert np.abs(out.to_complex()).max() == 0.0


def test_inject_ones_keeps_field_phases():
    field = generate_speckle(6, 6, MODE_PHASE_ONLY, seed=4)
    out = inject_speckle(AmplitudeImage(np.ones((6, 6))), field)
    assert np.abs(np.abs(out.to_complex()) - 1.0).max() < 1e-12
    assert np.array_equal(out.re, field.re) and np.array_equal(out.im, field.im)


def test_inject_matches_scalar_loop_oracle():
    rng = np.random.default_rng(5)
    amplitude = AmplitudeImage(rng.uniform(0, 50, (16, 16)))
    field = generate_speckle(16, 16, MODE_FULL, seed=6)
    out = inject_speckle(amplitude, field)
    for i in range(16):
        for j in range(16):
            assert out.re[i, j] == pytest.approx(amplitude.values[i, j] * field.re[i, j], abs=1e-12)
            assert out.im[i, j] == pytest.approx(amplitude.values[i, j] * field.im[i, j], abs=1e-12)
    # modulus factorizes exactly
    assert np.abs(np.abs(out.to_complex()) - amplitude.values * field.magnitude()).max() < 1e-12


def test_inject_dimension_mismatch():
    field = generate_speckle(4, 4, MODE_PHASE_ONLY, seed=0)
    with pytest.raises(RasterError, match="mismatch"):
        inject_speckle(AmplitudeImage(np.ones((4, 5))), field)


def test_phase_only_spectrum_is_flat():
    # Average the radial profile of |F(constant * field)|^2 over many
    # independent fields; the highest annulus must carry the same mean power
    # as the plane overall.
    from sarfx import forward_dft

    n, trials = 129, 64
    ones = AmplitudeImage(np.ones((n, n)))
    accum = None
    for trial in range(trials):
        field = generate_speckle(n, n, MODE_PHASE_ONLY, seed=10_000 + trial)
        profile = azimuthal_profile(forward_dft(inject_speckle(ones, field)))
        accum = profile.values if accum is None else accum + profile.values
        counts = profile.counts
    mean_profile = accum / trials
    populated = counts > 0
    overall = np.sum(mean_profile * counts) / counts.sum()
    top_ratio = mean_profile[populated][-1] / overall
    assert 0.8 <= top_ratio <= 1.2
