"""Pulse extraction: GREEN, CHROM and POS behavior."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pulselab import (
    BandpassSpec,
    ExtractorId,
    RgbTrace,
    extract,
    extract_chrom,
    extract_green,
    extract_pos,
)
from pulselab.errors import TooFewSamples

from conftest import dominant_frequency, flat_trace, flicker_trace, modulated_trace


def spectrum_amplitude_at(sig, freq_hz):
    """Magnitude of the spectral bin closest to a frequency."""
    spec = np.abs(np.fft.rfft(sig.samples))
    freqs = np.fft.rfftfreq(len(sig), 1.0 / sig.sample_rate)
    return float(spec[np.argmin(np.abs(freqs - freq_hz))])


def in_band_energy_fraction(sig, band):
    spec = np.abs(np.fft.rfft(sig.samples)) ** 2
    freqs = np.fft.rfftfreq(len(sig), 1.0 / sig.sample_rate)
    mask = (freqs >= band.low_hz) & (freqs <= band.high_hz)
    total = spec.sum()
    return spec[mask].sum() / total if total > 0 else 1.0


class TestGreen:
    def test_recovers_embedded_frequency(self):
        n = 1800
        t = np.arange(n) / 30.0
        g = 140.0 * (1.0 + 0.02 * np.sin(2 * np.pi * 1.2 * t))
        trace = RgbTrace(t=t, r=np.full(n, 180.0), g=g, b=np.full(n, 110.0),
                         nominal_rate=30.0)
        wave = extract_green(trace, 30.0)
        assert abs(dominant_frequency(wave.signal) - 1.2) < 0.05

    def test_constant_trace_yields_silence(self):
        wave = extract_green(flat_trace(), 30.0)
        assert np.max(np.abs(wave.signal.samples)) < 1e-6 * 100.0

    def test_single_sample_rejected(self):
        with pytest.raises(TooFewSamples):
            extract_green(
                RgbTrace(t=[0.0], r=[1.0], g=[1.0], b=[1.0], nominal_rate=30.0), 30.0
            )


class TestChrom:
    def test_rejects_common_mode_flicker(self):
        trace = flicker_trace(freq_hz=1.0)
        chrom_amp = spectrum_amplitude_at(extract_chrom(trace, 30.0).signal, 1.0)
        green_amp = spectrum_amplitude_at(extract_green(trace, 30.0).signal, 1.0)
        assert green_amp >= 10.0 * chrom_amp

    def test_recovers_pulse_frequency(self):
        trace = modulated_trace(1.5)
        wave = extract_chrom(trace, 30.0)
        assert abs(dominant_frequency(wave.signal) - 1.5) < 0.05

    def test_constant_trace_degenerate_windows_yield_silence(self):
        wave = extract_chrom(flat_trace(), 30.0)
        assert np.max(np.abs(wave.signal.samples)) < 1e-9


class TestPos:
    def test_recovers_pulse_frequency(self):
        trace = modulated_trace(1.0)
        wave = extract_pos(trace, 30.0)
        assert abs(dominant_frequency(wave.signal) - 1.0) < 0.05

    def test_rejects_common_mode_flicker(self):
        trace = flicker_trace(freq_hz=1.0)
        pos_amp = spectrum_amplitude_at(extract_pos(trace, 30.0).signal, 1.0)
        green_amp = spectrum_amplitude_at(extract_green(trace, 30.0).signal, 1.0)
        assert green_amp >= 10.0 * pos_amp

    def test_window_longer_than_trace_rejected(self):
        trace = modulated_trace(1.0, duration_s=5.0)
        with pytest.raises(TooFewSamples):
            extract_pos(trace, 30.0, window_s=10.0)

    def test_beats_are_maxima_for_skin_like_modulation(self, noisy_recording):
        # peaks of the extracted wave line up with embedded beats, not troughs
        trace, truth = noisy_recording
        wave = extract_pos(trace, 30.0)
        sig = wave.signal
        beats = truth.beat_times[5:-5]
        idx = np.round((beats - sig.t0) * sig.sample_rate).astype(int)
        at_beats = np.mean(sig.samples[idx])
        between = np.mean(sig.samples[(idx[:-1] + idx[1:]) // 2])
        assert at_beats > between

    def test_scale_invariance(self):
        trace = modulated_trace(1.2)
        scaled = RgbTrace(t=trace.t, r=3.7 * trace.r, g=3.7 * trace.g,
                          b=3.7 * trace.b, nominal_rate=trace.nominal_rate)
        out = extract_pos(trace, 30.0).signal.samples
        out_scaled = extract_pos(scaled, 30.0).signal.samples
        assert_allclose(out_scaled, out, rtol=1e-9, atol=1e-12)


class TestCommonProperties:
    @pytest.mark.parametrize("extractor", list(ExtractorId))
    def test_output_energy_in_band(self, extractor, noisy_recording):
        trace, _ = noisy_recording
        band = BandpassSpec(0.65, 3.5)
        wave = extract(extractor, trace, 30.0, band)
        assert in_band_energy_fraction(wave.signal, band) >= 0.95

    @pytest.mark.parametrize("extractor", list(ExtractorId))
    def test_deterministic(self, extractor, noisy_recording):
        trace, _ = noisy_recording
        a = extract(extractor, trace, 30.0)
        b = extract(extractor, trace, 30.0)
        assert_array_equal(a.signal.samples, b.signal.samples)

    def test_dispatch_matches_direct_calls(self, noisy_recording):
        trace, _ = noisy_recording
        assert_array_equal(
            extract(ExtractorId.GREEN, trace, 30.0).signal.samples,
            extract_green(trace, 30.0).signal.samples,
        )
        assert_array_equal(
            extract(ExtractorId.POS, trace, 30.0).signal.samples,
            extract_pos(trace, 30.0).signal.samples,
        )
        assert_array_equal(
            extract(ExtractorId.CHROM, trace, 30.0).signal.samples,
            extract_chrom(trace, 30.0).signal.samples,
        )

    def test_green_scale_covariance_keeps_peaks(self):
        trace = modulated_trace(1.2)
        scaled = RgbTrace(t=trace.t, r=2.0 * trace.r, g=2.0 * trace.g,
                          b=2.0 * trace.b, nominal_rate=trace.nominal_rate)
        out = extract_green(trace, 30.0).signal.samples
        out_scaled = extract_green(scaled, 30.0).signal.samples
        assert_allclose(out_scaled, 2.0 * out, rtol=1e-9, atol=1e-12)
