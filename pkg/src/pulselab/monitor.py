"""Live monitoring session: frames in, windowed biometric readings out.

One session owns one stream. Each pushed frame is resampled onto a
uniform grid, folded into the incremental extractor, causally filtered
and scanned for new pulse peaks; confirmed peaks extend the interval
series, and readings are emitted on a fixed update period once the
minimum window of data exists. Work per frame is O(1) amortized and all
buffers are bounded, so the session neither slows down nor grows with
stream duration.

Warm-up behavior: nothing is emitted before ``min_window_s`` of data;
until ``window_s`` has elapsed the reading window grows from the start
of the session; afterwards it slides. Gaps longer than ``gap_reset_s``
(a face leaving the camera) reset the pipeline and restart warm-up.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps
from scipy.signal.windows import hann

from .biometrics import BiometricReading, reading_for_window
from .errors import EmptyTrace, InsufficientSamples, NonMonotonicTimestamp, PreconditionError
from .extract import DEFAULT_BAND, DEFAULT_WINDOW_S, ExtractorId, RgbTrace, chrom_window, pos_window
from .peaks import DetectorState, IbiSeries, PeakDetectorConfig, correct_ibis, ibi_in_band
from .signals import BandpassSpec, design_butterworth_bandpass

_EPS = 1e-9

#: Intervals older than the reading window by this margin are pruned.
_IBI_PRUNE_MARGIN_S = 10.0


@dataclass(frozen=True)
class MonitorConfig:
    """Session hyperparameters: window span, update period, extractor."""

    extractor: ExtractorId = ExtractorId.POS
    nominal_rate: float = 30.0
    window_s: float = 60.0
    min_window_s: float = 10.0
    update_period_s: float = 1.0
    band: BandpassSpec = DEFAULT_BAND
    extractor_window_s: float = DEFAULT_WINDOW_S
    detector: PeakDetectorConfig = field(default_factory=PeakDetectorConfig)
    gap_reset_s: float = 2.0
    collect_timing: bool = True
    keep_peak_history: bool = False

    def __post_init__(self):
        if not (0 < self.min_window_s <= self.window_s):
            raise PreconditionError("need 0 < min_window_s <= window_s")
        if self.update_period_s <= 0:
            raise PreconditionError("update_period_s must be > 0")
        if self.nominal_rate <= 0:
            raise PreconditionError("nominal_rate must be > 0")
        if self.gap_reset_s <= 0:
            raise PreconditionError("gap_reset_s must be > 0")


@dataclass(frozen=True)
class FrameStats:
    """Wall-time statistics for push_frame, seconds."""

    n_frames: int
    mean_s: float
    p95_s: float
    max_s: float


class _GreenStream:
    """Per-sample green conditioning: offset removal and negation."""

    def __init__(self):
        self._offset = None

    def push(self, rgb: tuple[float, float, float]) -> list[float]:
        g = rgb[1]
        if self._offset is None:
            self._offset = g
        return [-(g - self._offset)]


class _WindowedStream:
    """Incremental Hann overlap-add of a per-window RGB projection.

    A sample is settled once every window covering it has been added;
    settled samples are emitted in order, normalized by the accumulated
    window weight (exactly 1 in the interior at 50% overlap).
    """

    def __init__(self, window_len: int, project, negate: bool):
        self.window_len = window_len
        self.hop = max(1, window_len // 2)
        self._w = hann(window_len, sym=False)
        self._project = project
        self._sign = -1.0 if negate else 1.0
        self._chans: list[list[float]] = [[], [], []]
        self._next_start = 0          # absolute grid index of the next window
        self._acc = np.zeros(window_len)
        self._ws = np.zeros(window_len)

    def push(self, rgb: tuple[float, float, float]) -> list[float]:
        for ch, v in zip(self._chans, rgb):
            ch.append(v)
        out: list[float] = []
        while len(self._chans[0]) >= self.window_len:
            r = np.array(self._chans[0][: self.window_len])
            g = np.array(self._chans[1][: self.window_len])
            b = np.array(self._chans[2][: self.window_len])
            h = self._project(r, g, b)
            self._acc += self._w * h
            self._ws += self._w
            settled = self._acc[: self.hop]
            weights = self._ws[: self.hop]
            vals = np.where(weights > 1e-12, settled / np.maximum(weights, 1e-12), 0.0)
            out.extend(self._sign * vals)
            self._acc = np.concatenate([self._acc[self.hop :], np.zeros(self.hop)])
            self._ws = np.concatenate([self._ws[self.hop :], np.zeros(self.hop)])
            self._next_start += self.hop
            for ch in self._chans:
                del ch[: self.hop]
        return out


class MonitorSession:
    """Streaming pipeline with single-owner mutable state.

    Not reentrant: call :meth:`push_frame` from one execution context.
    Distinct sessions are independent and may run in parallel.
    """

    def __init__(self, config: MonitorConfig | None = None):
        self.config = config or MonitorConfig()
        self._last_t: float | None = None
        self._last_emit: float | None = None
        self._timings: deque[float] = deque(maxlen=1_000_000)
        self.peak_times: list[float] = []
        self._init_pipeline()
        self._start_t: float | None = None

    # pipeline lifecycle -------------------------------------------------

    def _init_pipeline(self):
        cfg = self.config
        rate = cfg.nominal_rate
        self._grid_t0: float | None = None
        self._next_k = 0
        self._prev_t: float | None = None
        self._prev_rgb: tuple[float, float, float] | None = None
        if cfg.extractor is ExtractorId.GREEN:
            self._stream = _GreenStream()
        else:
            window_len = max(2, int(round(cfg.extractor_window_s * rate)))
            project = pos_window if cfg.extractor is ExtractorId.POS else chrom_window
            self._stream = _WindowedStream(window_len, project,
                                           negate=cfg.extractor is ExtractorId.POS)
        coeffs = design_butterworth_bandpass(cfg.band, rate)
        self._sos = coeffs.sos
        self._zi = np.zeros((coeffs.n_sections, 2))
        self._emitted = 0  # pulse samples handed to the detector so far
        self._detector = DetectorState(rate, cfg.detector)
        self._last_peak_t: float | None = None
        self._ibis: deque[tuple[float, float, bool]] = deque()

    def _reset(self, t: float):
        self._init_pipeline()
        self._start_t = t
        self._last_emit = None

    # frame ingestion ----------------------------------------------------

    def push_frame(self, t: float, r: float, g: float, b: float) -> BiometricReading | None:
        """Ingest one frame; return a reading when one is due, else None."""
        tic = time.perf_counter() if self.config.collect_timing else 0.0
        if self._last_t is not None:
            if t <= self._last_t:
                raise NonMonotonicTimestamp(
                    f"frame at {t} s not after previous frame at {self._last_t} s"
                )
            if t - self._last_t > self.config.gap_reset_s:
                self._reset(t)
        if self._start_t is None:
            self._start_t = t
        self._ingest(t, (float(r), float(g), float(b)))
        self._last_t = t
        reading = self._maybe_emit(t)
        if self.config.collect_timing:
            self._timings.append(time.perf_counter() - tic)
        return reading

    def push(self, t, r, g, b) -> list[BiometricReading]:
        """Push a batch of frames; return the readings emitted along the way."""
        out = []
        for args in zip(t, r, g, b):
            reading = self.push_frame(*args)
            if reading is not None:
                out.append(reading)
        return out

    def _ingest(self, t: float, rgb: tuple[float, float, float]):
        rate = self.config.nominal_rate
        if self._grid_t0 is None:
            self._grid_t0 = t
        pulse_vals: list[float] = []
        while self._grid_t0 + self._next_k / rate <= t + _EPS:
            grid_t = self._grid_t0 + self._next_k / rate
            if self._prev_t is None or grid_t >= t:
                value = rgb
            else:
                alpha = (grid_t - self._prev_t) / (t - self._prev_t)
                value = tuple(
                    p + alpha * (c - p) for p, c in zip(self._prev_rgb, rgb)
                )
            pulse_vals.extend(self._stream.push(value))
            self._next_k += 1
        self._prev_t = t
        self._prev_rgb = rgb
        if pulse_vals:
            filtered, self._zi = sps.sosfilt(self._sos, np.asarray(pulse_vals), zi=self._zi)
            self._emitted += len(filtered)
            for k in self._detector.push_values(filtered):
                self._on_peak(self._grid_t0 + k / rate)

    def _on_peak(self, peak_t: float):
        if self.config.keep_peak_history:
            self.peak_times.append(peak_t)
        if self._last_peak_t is not None:
            ibi = peak_t - self._last_peak_t
            self._ibis.append((peak_t, ibi, ibi_in_band(ibi)))
        self._last_peak_t = peak_t
        horizon = peak_t - self.config.window_s - _IBI_PRUNE_MARGIN_S
        while self._ibis and self._ibis[0][0] < horizon:
            self._ibis.popleft()

    # reading emission ---------------------------------------------------

    def _maybe_emit(self, t: float) -> BiometricReading | None:
        cfg = self.config
        if t - self._start_t < cfg.min_window_s - _EPS:
            return None
        if self._last_emit is not None and t - self._last_emit < cfg.update_period_s - _EPS:
            return None
        self._last_emit = t
        w_start = max(self._start_t, t - cfg.window_s)
        window = [e for e in self._ibis if w_start < e[0] <= t]
        if window:
            t_end, ibi, valid = (np.array(col) for col in zip(*window))
            series = correct_ibis(IbiSeries(t_end, ibi, valid.astype(bool)))
        else:
            series = IbiSeries.empty()
        return reading_for_window(series, (w_start, t))

    # introspection ------------------------------------------------------

    def frame_stats(self) -> FrameStats:
        """Per-frame wall-time statistics over the session so far."""
        n = len(self._timings)
        if n < 1000:
            raise InsufficientSamples(f"timing stats need >= 1000 frames, got {n}")
        arr = np.fromiter(self._timings, dtype=np.float64)
        return FrameStats(
            n_frames=n,
            mean_s=float(arr.mean()),
            p95_s=float(np.percentile(arr, 95)),
            max_s=float(arr.max()),
        )

    def buffered_counts(self) -> dict[str, int]:
        """Sizes of the internal buffers, for asserting bounded memory."""
        counts = {
            "detector_buffer": int(self._detector._buf.size),
            "ibi_entries": len(self._ibis),
        }
        if isinstance(self._stream, _WindowedStream):
            counts["extractor_channel"] = len(self._stream._chans[0])
        return counts


def per_frame_budget_check(session: MonitorSession) -> FrameStats:
    """Wall-time statistics for the session's push_frame calls.

    Requires at least 1000 processed frames for a stable estimate.
    """
    return session.frame_stats()


def process_recording(trace: RgbTrace, config: MonitorConfig | None = None) -> list[BiometricReading]:
    """Replay a recorded trace through a fresh session.

    Exactly the reading sequence that pushing every frame one by one
    produces, since that is literally what it does.
    """
    if len(trace) == 0:
        raise EmptyTrace("cannot replay an empty trace")
    session = MonitorSession(config)
    return session.push(trace.t, trace.r, trace.g, trace.b)
