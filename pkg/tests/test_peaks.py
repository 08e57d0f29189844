"""Peak detection (batch and streaming) and interval correction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pulselab import (
    BandpassSpec,
    DetectorState,
    IbiSeries,
    PeakDetectorConfig,
    UniformSignal,
    correct_ibis,
    design_butterworth_bandpass,
    detect_peaks,
    detect_peaks_streaming,
    filter_zero_phase,
    peaks_to_ibis,
)
from pulselab.peaks import IBI_MAX_S, IBI_MIN_S, PeakList
from pulselab.errors import EmptySignal, OutOfOrderChunk

from conftest import aligned_cosine, bump_train


def series_from_ibis(ibis, t0=0.0):
    ibis = np.asarray(ibis, dtype=float)
    t_end = t0 + np.cumsum(ibis)
    valid = (ibis >= IBI_MIN_S) & (ibis <= IBI_MAX_S)
    return IbiSeries(t_end, ibis, valid)


class TestDetectPeaks:
    def test_sharp_train_detected_exactly(self):
        beats = np.arange(1.0, 10.0)  # integer seconds, sample-aligned at 30 Hz
        sig = bump_train(beats, duration_s=11.0, rate=30.0, sigma_s=0.08)
        peaks = detect_peaks(sig)
        assert_array_equal(peaks.indices, (beats * 30).astype(int))

    def test_sinusoid_peak_count_and_spacing(self):
        sig = aligned_cosine(freq_hz=1.0, duration_s=10.0, rate=30.0, crest_index=8)
        peaks = detect_peaks(sig)
        assert len(peaks) == 10
        assert_array_equal(np.diff(peaks.indices), 30)

    def test_monotonic_ramp_has_no_peaks(self):
        sig = UniformSignal(np.linspace(0, 1, 300), 30.0)
        assert len(detect_peaks(sig)) == 0

    def test_empty_rejected(self):
        with pytest.raises(EmptySignal):
            detect_peaks(UniformSignal(np.empty(0), 30.0))

    def test_min_distance_enforced(self):
        sig = aligned_cosine(freq_hz=1.0, duration_s=20.0, rate=30.0)
        cfg = PeakDetectorConfig(min_distance_s=1.5)
        peaks = detect_peaks(sig, cfg)
        assert np.all(np.diff(peaks.times) >= 1.5)

    def test_times_match_indices(self):
        sig = aligned_cosine(duration_s=10.0)
        peaks = detect_peaks(sig)
        assert_allclose(peaks.times, sig.t0 + peaks.indices / sig.sample_rate)


def realistic_stream(seed, duration_s=40.0, rate=30.0):
    """Bandpassed noise: a worst case full of contested local maxima."""
    rng = np.random.default_rng(seed)
    raw = UniformSignal(rng.normal(size=int(duration_s * rate)), rate)
    coeffs = design_butterworth_bandpass(BandpassSpec(0.65, 3.5), rate)
    return filter_zero_phase(raw, coeffs)


class TestStreaming:
    @pytest.mark.parametrize("chunk_size", [1, 7, 64])
    def test_matches_batch_except_tail(self, chunk_size):
        for seed in range(5):
            sig = realistic_stream(seed)
            batch = detect_peaks(sig)
            state = DetectorState(sig.sample_rate, t0=sig.t0)
            confirmed = []
            for start in range(0, len(sig), chunk_size):
                chunk = UniformSignal(
                    sig.samples[start : start + chunk_size],
                    sig.sample_rate,
                    sig.t0 + start / sig.sample_rate,
                )
                state, new = detect_peaks_streaming(state, chunk)
                confirmed.extend(new.indices)
            # streaming is a prefix of batch; the remainder lies in the tail
            assert list(batch.indices[: len(confirmed)]) == confirmed
            tail_start = len(sig) - 1 - state._dist
            assert all(i >= tail_start for i in batch.indices[len(confirmed) :])

    def test_one_sample_chunks_equal_one_shot(self):
        sig = realistic_stream(99)
        state1 = DetectorState(sig.sample_rate, t0=sig.t0)
        got1 = []
        for start in range(len(sig)):
            chunk = UniformSignal(sig.samples[start : start + 1], sig.sample_rate,
                                  sig.t0 + start / sig.sample_rate)
            state1, new = detect_peaks_streaming(state1, chunk)
            got1.extend(new.indices)
        state2 = DetectorState(sig.sample_rate, t0=sig.t0)
        _, all_at_once = detect_peaks_streaming(state2, sig)
        assert got1 == list(all_at_once.indices)

    def test_empty_chunk_is_noop(self):
        state = DetectorState(30.0)
        state, new = detect_peaks_streaming(state, UniformSignal(np.empty(0), 30.0))
        assert len(new) == 0

    def test_out_of_order_chunk_rejected(self):
        sig = realistic_stream(1)
        state = DetectorState(sig.sample_rate, t0=sig.t0)
        first = UniformSignal(sig.samples[:100], sig.sample_rate, sig.t0)
        state, _ = detect_peaks_streaming(state, first)
        stale = UniformSignal(sig.samples[:10], sig.sample_rate, sig.t0)
        with pytest.raises(OutOfOrderChunk):
            detect_peaks_streaming(state, stale)

    def test_bounded_buffer(self):
        sig = realistic_stream(2, duration_s=120.0)
        state = DetectorState(sig.sample_rate)
        detect_peaks_streaming(state, sig)
        assert state._buf.size <= state.lookback_samples + len(sig) * 0  # trimmed
        assert state._buf.size <= state.lookback_samples * 2


class TestPeaksToIbis:
    def test_unit_intervals(self):
        peaks = PeakList(np.array([0, 30, 60, 90]), np.array([0.0, 1.0, 2.0, 3.0]))
        series = peaks_to_ibis(peaks)
        assert_allclose(series.ibi, [1.0, 1.0, 1.0])
        assert series.valid.all()
        assert_allclose(series.t_end, [1.0, 2.0, 3.0])

    def test_too_fast_interval_invalid(self):
        peaks = PeakList(np.array([0, 3]), np.array([0.0, 0.1]))
        series = peaks_to_ibis(peaks)
        assert len(series) == 1
        assert not series.valid[0]

    def test_single_peak_empty_series(self):
        peaks = PeakList(np.array([5]), np.array([0.2]))
        assert len(peaks_to_ibis(peaks)) == 0


class TestCorrectIbis:
    def test_clean_series_unchanged(self):
        series = series_from_ibis([0.8, 0.9, 1.0, 0.85])
        out = correct_ibis(series)
        assert_allclose(out.ibi, series.ibi)
        assert_allclose(out.t_end, series.t_end)
        assert out.valid.all()

    def test_merge_rule(self):
        series = series_from_ibis([0.8, 0.15, 0.65, 0.8])
        out = correct_ibis(series)
        assert_allclose(out.ibi, [0.8, 0.8, 0.8])
        assert out.valid.all()
        assert_allclose(out.t_end, [0.8, 1.6, 2.4])

    def test_split_rule(self):
        series = series_from_ibis([0.8, 0.8, 1.62, 0.8, 0.8])
        out = correct_ibis(series)
        assert_allclose(out.ibi, [0.8, 0.8, 0.81, 0.81, 0.8, 0.8])
        assert out.valid.all()

    def test_unrepairable_interval_flagged_invalid(self):
        # a 3 s dropout is not near twice the local median, so it is dropped
        series = series_from_ibis([0.8, 0.8, 3.0, 0.8, 0.8])
        out = correct_ibis(series)
        assert len(out) == 5
        assert not out.valid[2]
        assert_allclose(out.valid_ibis(), [0.8, 0.8, 0.8, 0.8])

    def test_idempotent_on_random_series(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = rng.integers(1, 40)
            ibis = rng.uniform(0.05, 2.5, n)
            once = correct_ibis(series_from_ibis(ibis))
            twice = correct_ibis(once)
            assert_array_equal(once.t_end, twice.t_end)
            assert_array_equal(once.ibi, twice.ibi)
            assert_array_equal(once.valid, twice.valid)

    def test_valid_entries_always_in_band(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            ibis = rng.uniform(0.05, 3.0, rng.integers(1, 40))
            out = correct_ibis(series_from_ibis(ibis))
            ok = out.valid_ibis()
            assert np.all((ok >= IBI_MIN_S) & (ok <= IBI_MAX_S))


class TestRoundTrip:
    def test_train_recovers_known_intervals(self):
        rng = np.random.default_rng(3)
        rate = 30.0
        ibis = rng.uniform(0.6, 1.1, 40)
        beats = 1.0 + np.cumsum(ibis)
        sig = bump_train(beats, duration_s=beats[-1] + 1.5, rate=rate, sigma_s=0.08)
        series = peaks_to_ibis(detect_peaks(sig))
        assert len(series) == len(ibis) - 1  # one interval per consecutive beat pair
        assert np.max(np.abs(series.ibi - ibis[1:])) <= 1.0 / rate + 1e-9
