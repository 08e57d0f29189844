"""Pulse-peak detection and inter-beat interval extraction.

The detector uses a single left-to-right adjudication rule so that the
batch and streaming paths are the same algorithm by construction. A
candidate sample is accepted as a peak when it

1. is a strict local maximum,
2. lies at least the minimum distance after the last accepted peak,
3. is not exceeded by any sample within the minimum distance ahead of
   it (so a taller rival close behind wins instead), and
4. has prominence, measured as the drop to the lowest sample within the
   minimum distance behind it, of at least ``prominence_fraction`` of
   the rolling signal amplitude.

Rule 3 is what makes the decision final after a fixed lookahead: once
the minimum distance of subsequent signal has been seen, a confirmed
peak is never retracted. Batch detection additionally adjudicates the
trailing candidates with whatever lookahead remains, so streaming and
batch agree everywhere except possibly within the final minimum
distance of the signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySignal, OutOfOrderChunk, PreconditionError
from .extract import PulseWave
from .signals import UniformSignal

#: Validity band for inter-beat intervals, from the 39-210 bpm range.
IBI_MIN_S = 60.0 / 210.0
IBI_MAX_S = 60.0 / 39.0

#: Span of the rolling amplitude estimate the prominence rule is relative to.
AMPLITUDE_WINDOW_S = 10.0


def ibi_in_band(ibi_s: float) -> bool:
    """True when an interval corresponds to 39..210 bpm."""
    return IBI_MIN_S <= ibi_s <= IBI_MAX_S


@dataclass(frozen=True)
class PeakDetectorConfig:
    """Tuning for the peak detector.

    ``min_distance_s`` doubles as the refractory period after an
    accepted peak and as the confirmation lookahead.
    """

    min_distance_s: float = IBI_MIN_S
    prominence_fraction: float = 0.3

    def __post_init__(self):
        if self.min_distance_s <= 0:
            raise PreconditionError("min_distance_s must be > 0")
        if not (0 < self.prominence_fraction <= 1):
            raise PreconditionError("prominence_fraction must be in (0, 1]")


@dataclass(frozen=True)
class PeakList:
    """Detected peak positions as sample indices and times."""

    indices: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.float64))
        if self.indices.size != self.times.size:
            raise PreconditionError("indices and times must have equal length")
        if self.indices.size > 1 and np.any(np.diff(self.indices) <= 0):
            raise PreconditionError("peak indices must be strictly increasing")

    def __len__(self) -> int:
        return self.indices.size


@dataclass(frozen=True)
class IbiSeries:
    """Inter-beat intervals anchored at the time of their closing peak."""

    t_end: np.ndarray
    ibi: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t_end", np.asarray(self.t_end, dtype=np.float64))
        object.__setattr__(self, "ibi", np.asarray(self.ibi, dtype=np.float64))
        object.__setattr__(self, "valid", np.asarray(self.valid, dtype=bool))
        if not (self.t_end.size == self.ibi.size == self.valid.size):
            raise PreconditionError("t_end, ibi and valid must have equal length")
        if self.t_end.size > 1 and np.any(np.diff(self.t_end) <= 0):
            raise PreconditionError("t_end must be strictly increasing")

    def __len__(self) -> int:
        return self.t_end.size

    def valid_ibis(self) -> np.ndarray:
        return self.ibi[self.valid]

    @staticmethod
    def empty() -> "IbiSeries":
        return IbiSeries(np.empty(0), np.empty(0), np.empty(0, dtype=bool))


class DetectorState:
    """Incremental peak detector over a uniformly sampled stream.

    Owned by exactly one stream; feed chunks in order via
    :func:`detect_peaks_streaming` or :meth:`push_values`. The internal
    buffer is trimmed to the rolling-amplitude span plus the lookahead,
    so memory does not grow with stream length.
    """

    def __init__(self, sample_rate: float, config: PeakDetectorConfig | None = None,
                 t0: float = 0.0):
        if sample_rate <= 0:
            raise PreconditionError("sample_rate must be > 0")
        self.sample_rate = float(sample_rate)
        self.config = config or PeakDetectorConfig()
        self.t0 = float(t0)
        self._t0_fixed = False
        # lookahead/refractory and amplitude window in samples
        self._dist = max(1, math.ceil(self.config.min_distance_s * sample_rate - 1e-9))
        self._amp_win = max(2, int(round(AMPLITUDE_WINDOW_S * sample_rate)))
        self._buf = np.empty(0)
        self._base = 0            # absolute index of _buf[0]
        self._n_seen = 0
        self._frontier = 1        # next candidate index to adjudicate
        self._last_peak: int | None = None

    @property
    def lookback_samples(self) -> int:
        """Upper bound on buffered samples (assertable memory cap)."""
        return self._amp_win + self._dist + 4

    def expected_next_t(self) -> float:
        return self.t0 + self._n_seen / self.sample_rate

    def peak_time(self, index: int) -> float:
        return self.t0 + index / self.sample_rate

    def _decide(self, k: int, horizon: int) -> bool:
        """Apply the four rules to candidate ``k`` with lookahead to ``horizon``."""
        v = self._buf
        rel = k - self._base
        if k + 1 > horizon:
            return False
        if not (v[rel - 1] < v[rel] > v[rel + 1]):
            return False
        if self._last_peak is not None and k - self._last_peak < self._dist:
            return False
        ahead = v[rel + 1 : rel + (horizon - k) + 1]
        if ahead.size and ahead.max() > v[rel]:
            return False
        lo_prom = max(0, k - self._dist) - self._base
        prom = v[rel] - v[lo_prom : rel + 1].min()
        lo_amp = max(0, k - self._amp_win + 1) - self._base
        window = v[lo_amp : rel + 1]
        amplitude = window.max() - window.min()
        return prom >= self.config.prominence_fraction * amplitude

    def push_values(self, values: np.ndarray) -> list[int]:
        """Ingest samples; return absolute indices of newly confirmed peaks."""
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return []
        self._buf = np.concatenate([self._buf, values])
        self._n_seen += values.size
        confirmed = []
        # adjudicate every candidate whose full lookahead is available
        while self._frontier + self._dist <= self._n_seen - 1:
            k = self._frontier
            if self._decide(k, k + self._dist):
                self._last_peak = k
                confirmed.append(k)
            self._frontier += 1
        # trim history no rule can reach any more
        keep_from = max(0, self._frontier - max(self._amp_win, self._dist) - 1)
        if keep_from > self._base:
            self._buf = self._buf[keep_from - self._base :]
            self._base = keep_from
        return confirmed

    def flush_tail(self) -> list[int]:
        """End of stream: adjudicate the tail with truncated lookahead."""
        confirmed = []
        horizon = self._n_seen - 1
        while self._frontier <= self._n_seen - 2:
            k = self._frontier
            if self._decide(k, min(k + self._dist, horizon)):
                self._last_peak = k
                confirmed.append(k)
            self._frontier += 1
        return confirmed


def detect_peaks_streaming(
    state: DetectorState, chunk: UniformSignal
) -> tuple[DetectorState, PeakList]:
    """Feed one chunk to a detector; return it with the newly confirmed peaks.

    Chunks must arrive back to back: the chunk's ``t0`` has to match the
    end of what the state has already seen. An empty chunk is a no-op.
    """
    if len(chunk) == 0:
        return state, PeakList(np.empty(0, dtype=np.int64), np.empty(0))
    if abs(chunk.sample_rate - state.sample_rate) > 1e-9 * state.sample_rate:
        raise OutOfOrderChunk(
            f"chunk rate {chunk.sample_rate} Hz != stream rate {state.sample_rate} Hz"
        )
    if not state._t0_fixed:
        state.t0 = chunk.t0
        state._t0_fixed = True
    else:
        expected = state.expected_next_t()
        if abs(chunk.t0 - expected) > 0.5 / state.sample_rate:
            raise OutOfOrderChunk(
                f"chunk starts at {chunk.t0:.6f} s, expected {expected:.6f} s"
            )
    idx = state.push_values(chunk.samples)
    times = np.array([state.peak_time(i) for i in idx])
    return state, PeakList(np.asarray(idx, dtype=np.int64), times)


def detect_peaks(wave: PulseWave | UniformSignal,
                 config: PeakDetectorConfig | None = None) -> PeakList:
    """Detect pulse peaks in a complete signal.

    Equivalent to streaming the whole signal through a fresh
    :class:`DetectorState` and then flushing the tail.
    """
    sig = wave.signal if isinstance(wave, PulseWave) else wave
    if len(sig) == 0:
        raise EmptySignal("cannot detect peaks in an empty signal")
    state = DetectorState(sig.sample_rate, config, t0=sig.t0)
    idx = state.push_values(sig.samples)
    idx += state.flush_tail()
    indices = np.asarray(idx, dtype=np.int64)
    return PeakList(indices, sig.t0 + indices / sig.sample_rate)


def peaks_to_ibis(peaks: PeakList) -> IbiSeries:
    """Turn consecutive peak times into intervals, flagging the in-band ones."""
    if len(peaks) < 2:
        return IbiSeries.empty()
    ibis = np.diff(peaks.times)
    valid = (ibis >= IBI_MIN_S) & (ibis <= IBI_MAX_S)
    return IbiSeries(peaks.times[1:], ibis, valid)


def _local_median(entries: list[tuple[float, float, bool]], i: int) -> float | None:
    """Median of valid intervals within five entries on either side of ``i``."""
    lo, hi = max(0, i - 5), min(len(entries), i + 6)
    vals = [e[1] for j, e in enumerate(entries[lo:hi], start=lo) if j != i and e[2]]
    if not vals:
        return None
    return float(np.median(vals))


def _correction_pass(entries: list[tuple[float, float, bool]]):
    out: list[tuple[float, float, bool]] = []
    i = 0
    n = len(entries)
    while i < n:
        t_end, ibi, _ = entries[i]
        if ibi < IBI_MIN_S and i + 1 < n:
            merged = ibi + entries[i + 1][1]
            if ibi_in_band(merged):
                # a spurious extra peak split one true interval in two
                out.append((entries[i + 1][0], merged, True))
                i += 2
                continue
        if ibi > IBI_MAX_S:
            med = _local_median(entries, i)
            if med is not None and 1.6 * med <= ibi <= 2.4 * med:
                # a missed peak fused two true intervals; split evenly
                half = ibi / 2.0
                out.append((t_end - half, half, ibi_in_band(half)))
                out.append((t_end, half, ibi_in_band(half)))
                i += 1
                continue
        out.append((t_end, ibi, ibi_in_band(ibi)))
        i += 1
    return out


def correct_ibis(series: IbiSeries) -> IbiSeries:
    """Repair interval artifacts from imperfect peak detection.

    Merge rule: an invalid-short interval whose sum with its successor
    lands in the validity band is merged with it (a false extra peak).
    Split rule: an invalid-long interval close to twice the local median
    (within 20%) is split in half (a missed peak). Whatever remains
    invalid is flagged ``valid=False`` and ignored downstream. Passes
    repeat until nothing changes, so the operation is idempotent.
    """
    entries = [
        (float(t), float(d), bool(v))
        for t, d, v in zip(series.t_end, series.ibi, series.valid)
    ]
    for _ in range(len(entries) + 1):
        new = _correction_pass(entries)
        if new == entries:
            break
        entries = new
    if not entries:
        return IbiSeries.empty()
    t_end, ibi, valid = zip(*entries)
    return IbiSeries(np.array(t_end), np.array(ibi), np.array(valid))
