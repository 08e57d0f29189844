"""Signal core: resampling, detrending and Butterworth filtering."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pulselab import (
    BandpassSpec,
    UniformSignal,
    design_butterworth_bandpass,
    detrend_moving_mean,
    filter_causal,
    filter_zero_phase,
    resample_uniform,
)
from pulselab.errors import (
    EmptySignal,
    InvalidBand,
    NonMonotonicTimestamps,
    SignalTooShort,
    TooFewSamples,
)

from conftest import sine_signal


def sos_magnitude(coeffs, freqs):
    """Analytic magnitude response evaluated straight from the biquads."""
    z = np.exp(-2j * np.pi * np.atleast_1d(freqs) / coeffs.sample_rate)
    h = np.ones_like(z, dtype=complex)
    for b0, b1, b2, a0, a1, a2 in coeffs.sos:
        h *= (b0 + b1 * z + b2 * z * z) / (a0 + a1 * z + a2 * z * z)
    return np.abs(h)


def local_maxima(x):
    return [k for k in range(1, len(x) - 1) if x[k - 1] < x[k] > x[k + 1]]


class TestResample:
    def test_identity_on_uniform_grid(self):
        t = np.arange(300) / 30.0
        v = np.sin(t)
        out = resample_uniform(t, v, 30.0)
        assert len(out) == 300
        assert_array_equal(out.samples, v)

    def test_hand_derived_interpolation(self):
        out = resample_uniform(np.array([0.0, 1.0, 2.0]), np.array([0.0, 10.0, 20.0]), 2.0)
        assert_allclose(out.samples, [0.0, 5.0, 10.0, 15.0, 20.0])
        assert out.sample_rate == 2.0

    def test_single_sample_rejected(self):
        with pytest.raises(TooFewSamples):
            resample_uniform(np.array([0.0]), np.array([1.0]), 30.0)

    def test_non_monotonic_rejected(self):
        with pytest.raises(NonMonotonicTimestamps):
            resample_uniform(np.array([0.0, 1.0, 1.0]), np.zeros(3), 30.0)

    def test_idempotent_at_same_rate(self):
        rng = np.random.default_rng(0)
        sig = UniformSignal(rng.normal(size=500), 30.0, t0=2.5)
        out = resample_uniform(sig.times(), sig.samples, 30.0)
        assert_array_equal(out.samples, sig.samples)
        assert out.t0 == sig.t0

    def test_no_extrapolation(self):
        # 2.6 s span at 1 Hz keeps grid points 0, 1, 2 only
        out = resample_uniform(np.array([0.0, 2.6]), np.array([0.0, 2.6]), 1.0)
        assert len(out) == 3


class TestDetrend:
    def test_constant_becomes_zero(self):
        sig = UniformSignal(np.full(100, 7.5), 30.0)
        out = detrend_moving_mean(sig, 2.0)
        assert_allclose(out.samples, 0.0, atol=1e-12)

    def test_global_window_removes_global_mean(self):
        ramp = np.arange(50, dtype=float)
        sig = UniformSignal(ramp, 1.0)
        out = detrend_moving_mean(sig, 200.0)  # window spans everything everywhere
        assert_allclose(out.samples, ramp - ramp.mean())

    def test_truncated_edge_windows_by_hand(self):
        # ramp 0..9 at 1 Hz, 3 s window: interior exactly 0, edges +-0.5
        sig = UniformSignal(np.arange(10, dtype=float), 1.0)
        out = detrend_moving_mean(sig, 3.0)
        assert_allclose(out.samples[1:-1], 0.0, atol=1e-12)
        assert_allclose(out.samples[0], -0.5)
        assert_allclose(out.samples[-1], 0.5)

    def test_empty_rejected(self):
        with pytest.raises(EmptySignal):
            detrend_moving_mean(UniformSignal(np.empty(0), 30.0), 1.0)


class TestFilterDesign:
    def test_narrow_band_response(self):
        coeffs = design_butterworth_bandpass(BandpassSpec(0.75, 2.5), 30.0)
        assert sos_magnitude(coeffs, 1e-6)[0] < 1e-3
        center = np.sqrt(0.75 * 2.5)
        grid = np.linspace(0.01, 14.99, 8000)
        peak = sos_magnitude(coeffs, grid).max()
        assert sos_magnitude(coeffs, center)[0] >= 0.99 * peak
        assert sos_magnitude(coeffs, 1.37)[0] >= 0.99 * peak

    @pytest.mark.parametrize("band", [(0.75, 2.5), (0.65, 3.5)])
    def test_edges_at_minus_3db(self, band):
        coeffs = design_butterworth_bandpass(BandpassSpec(*band), 30.0)
        for edge in band:
            level_db = 20 * np.log10(sos_magnitude(coeffs, edge)[0])
            assert abs(level_db - (-3.0)) <= 0.5

    def test_response_unimodal(self):
        coeffs = design_butterworth_bandpass(BandpassSpec(0.65, 3.5), 30.0)
        mag = sos_magnitude(coeffs, np.linspace(0.01, 14.99, 4000))
        d = np.diff(mag)
        d = d[np.abs(d) > 1e-13]
        assert np.sum(np.diff(np.sign(d)) != 0) == 1

    def test_degenerate_band_rejected(self):
        with pytest.raises(InvalidBand):
            BandpassSpec(1.0, 1.0)
        with pytest.raises(InvalidBand):
            design_butterworth_bandpass(BandpassSpec(0.75, 16.0), 30.0)


class TestCausalFilter:
    @pytest.fixture
    def coeffs(self):
        return design_butterworth_bandpass(BandpassSpec(0.75, 2.5), 30.0)

    def test_zero_in_zero_out(self, coeffs):
        out = filter_causal(UniformSignal(np.zeros(100), 30.0), coeffs)
        assert_array_equal(out.samples, 0.0)

    def test_dc_decays_to_zero(self, coeffs):
        out = filter_causal(UniformSignal(np.ones(3000), 30.0), coeffs)
        assert np.max(np.abs(out.samples[-300:])) < 1e-3

    def test_impulse_response_matches_analytic_magnitude(self, coeffs):
        n = 4096
        impulse = np.zeros(n)
        impulse[0] = 1.0
        out = filter_causal(UniformSignal(impulse, 30.0), coeffs)
        dft = np.abs(np.fft.rfft(out.samples))
        freqs = np.fft.rfftfreq(n, 1 / 30.0)
        assert_allclose(dft, sos_magnitude(coeffs, freqs), atol=0.01)

    def test_linearity(self, coeffs):
        rng = np.random.default_rng(1)
        x = UniformSignal(rng.normal(size=600), 30.0)
        y = UniformSignal(rng.normal(size=600), 30.0)
        a, b = 2.5, -0.7
        combined = filter_causal(x.with_samples(a * x.samples + b * y.samples), coeffs)
        separate = a * filter_causal(x, coeffs).samples + b * filter_causal(y, coeffs).samples
        assert_allclose(combined.samples, separate, rtol=1e-9, atol=1e-12)

    def test_empty_rejected(self, coeffs):
        with pytest.raises(EmptySignal):
            filter_causal(UniformSignal(np.empty(0), 30.0), coeffs)


class TestZeroPhaseFilter:
    @pytest.fixture
    def coeffs(self):
        return design_butterworth_bandpass(BandpassSpec(0.75, 2.5), 30.0)

    def test_in_band_peak_indices_unchanged(self, coeffs):
        sig = sine_signal(1.5, duration_s=20.0, rate=30.0, phase=0.3)
        out = filter_zero_phase(sig, coeffs)
        peaks_in = local_maxima(sig.samples)
        peaks_out = local_maxima(out.samples)
        assert peaks_in[1:-1] == peaks_out[1 : len(peaks_in) - 1]

    def test_zero_in_zero_out(self, coeffs):
        out = filter_zero_phase(UniformSignal(np.zeros(200), 30.0), coeffs)
        assert_allclose(out.samples, 0.0, atol=1e-15)

    def test_too_short_rejected(self, coeffs):
        with pytest.raises(SignalTooShort):
            filter_zero_phase(UniformSignal(np.zeros(3), 30.0), coeffs)
