"""Heart rate, SDNN and Baevsky stress from inter-beat intervals.

All interval arguments are in seconds. Heart rate is 60 over the mean
interval; SDNN is the population standard deviation in milliseconds;
the stress index is

    SI = AMo / (2 * Mo * 3.92 * SDNN)

with Mo the center of the most populated 50 ms histogram bin (seconds),
AMo the fraction of intervals in that bin, and SDNN in seconds. The
3.92 * SDNN term is the spread covering 95% of intervals (1.96 standard
deviations either side of the mean) and replaces the classical max-min
range, which is fragile against a single misclassified interval.

Windowed readings report degenerate situations (too few intervals, zero
spread) as typed undefined fields rather than exceptions or infinities,
so a live monitor keeps running.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len, rfft, rfftfreq
from scipy.signal.windows import hann

from .errors import (
    DegenerateWindow,
    EmptyInput,
    NoValidIbis,
    PreconditionError,
    SignalTooShort,
    TooFewIbis,
)
from .extract import PulseWave
from .peaks import IbiSeries
from .signals import BandpassSpec, UniformSignal, design_butterworth_bandpass, filter_zero_phase

#: Histogram bin width for the stress index, seconds.
MODE_BIN_S = 0.050

#: Spread multiplier covering 95% of interval samples.
SPREAD_95 = 3.92

#: Minimum signal duration for spectral heart-rate estimation, seconds.
FFT_MIN_DURATION_S = 10.0

#: Spectral grid resolution for the dominant-frequency search, Hz.
FFT_GRID_HZ = 0.01

# reasons attached to undefined reading fields
REASON_NO_VALID_IBIS = "no_valid_ibis"
REASON_TOO_FEW_IBIS = "too_few_ibis"
REASON_DEGENERATE = "degenerate"


def ibis_ms_to_s(ibis_ms) -> np.ndarray:
    """Milliseconds to seconds; round-trips with :func:`ibis_s_to_ms`."""
    return np.asarray(ibis_ms, dtype=np.float64) / 1000.0


def ibis_s_to_ms(ibis_s) -> np.ndarray:
    """Seconds to milliseconds."""
    return np.asarray(ibis_s, dtype=np.float64) * 1000.0


def heart_rate_bpm(ibis) -> float:
    """Beats per minute: 60 over the mean interval."""
    ibis = np.asarray(ibis, dtype=np.float64)
    if ibis.size == 0:
        raise NoValidIbis("heart rate needs at least one interval")
    return 60.0 / float(np.mean(ibis))


def sdnn_ms(ibis) -> float:
    """Population standard deviation of the intervals, milliseconds."""
    ibis = np.asarray(ibis, dtype=np.float64)
    if ibis.size < 2:
        raise TooFewIbis(f"SDNN needs >= 2 intervals, got {ibis.size}")
    return float(np.std(ibis)) * 1000.0


@dataclass(frozen=True)
class HistogramMode:
    """Most populated 50 ms interval bin."""

    mode_bin_start: float
    mo: float
    amo: float


def ibi_histogram_mode(ibis) -> HistogramMode:
    """Mode of the interval histogram, 50 ms bins anchored at zero.

    Ties break toward the lower bin; ``mo`` is the bin center and
    ``amo`` the fraction of intervals falling in the bin.
    """
    ibis = np.asarray(ibis, dtype=np.float64)
    if ibis.size == 0:
        raise EmptyInput("histogram mode needs at least one interval")
    # nudge values sitting on a bin boundary into the upper bin they open
    bins = np.floor(ibis / MODE_BIN_S + 1e-9).astype(np.int64)
    counts = np.bincount(bins)
    mode_bin = int(np.argmax(counts))  # argmax takes the first, so lower bin wins ties
    start = mode_bin * MODE_BIN_S
    return HistogramMode(
        mode_bin_start=start,
        mo=start + MODE_BIN_S / 2.0,
        amo=counts[mode_bin] / ibis.size,
    )


def baevsky_si(ibis) -> float:
    """Stress index from the interval multiset.

    Raises
    ------
    TooFewIbis
        Fewer than two intervals.
    DegenerateWindow
        All intervals identical; the index would divide by zero.
    """
    ibis = np.asarray(ibis, dtype=np.float64)
    if ibis.size < 2:
        raise TooFewIbis(f"stress index needs >= 2 intervals, got {ibis.size}")
    # identical intervals leave std at round-off scale, not exactly zero
    if np.all(ibis == ibis[0]):
        raise DegenerateWindow("all intervals identical, stress index undefined")
    sd_s = float(np.std(ibis))
    if sd_s == 0.0:
        raise DegenerateWindow("zero interval spread, stress index undefined")
    mode = ibi_histogram_mode(ibis)
    return mode.amo / (2.0 * mode.mo * SPREAD_95 * sd_s)


def hr_from_fft(wave: PulseWave | UniformSignal,
                band: BandpassSpec) -> float:
    """Heart rate as the dominant in-band frequency times 60.

    Bandpasses the signal (zero phase), applies a Hann window and reads
    the magnitude-spectrum argmax within the band off a zero-padded grid
    no coarser than 0.01 Hz.
    """
    sig = wave.signal if isinstance(wave, PulseWave) else wave
    if sig.duration_s < FFT_MIN_DURATION_S:
        raise SignalTooShort(
            f"spectral heart rate needs >= {FFT_MIN_DURATION_S} s, got {sig.duration_s:.2f} s"
        )
    coeffs = design_butterworth_bandpass(band, sig.sample_rate)
    filtered = filter_zero_phase(sig, coeffs)
    x = filtered.samples * hann(len(filtered), sym=False)
    n_fft = next_fast_len(max(len(x), int(np.ceil(sig.sample_rate / FFT_GRID_HZ))))
    spectrum = np.abs(rfft(x, n=n_fft))
    freqs = rfftfreq(n_fft, 1.0 / sig.sample_rate)
    in_band = (freqs >= band.low_hz) & (freqs <= band.high_hz)
    if not np.any(in_band):
        raise PreconditionError("no spectral grid point inside the band")
    band_freqs = freqs[in_band]
    return float(band_freqs[np.argmax(spectrum[in_band])]) * 60.0


@dataclass(frozen=True)
class BiometricReading:
    """One windowed reading; undefined fields carry a reason instead."""

    t_start: float
    t_end: float
    hr_bpm: float | None
    sdnn_ms: float | None
    stress_si: float | None
    n_ibis: int
    reasons: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        """``ok`` when everything is defined, else the dominant reason."""
        if not self.reasons:
            return "ok"
        for reason in (REASON_NO_VALID_IBIS, REASON_TOO_FEW_IBIS, REASON_DEGENERATE):
            if reason in self.reasons.values():
                return reason
        return next(iter(self.reasons.values()))


def reading_for_window(series: IbiSeries, window: tuple[float, float]) -> BiometricReading:
    """Compute all three biometrics over one time window.

    Selects valid intervals whose closing peak falls in
    ``(t_start, t_end]``. Fields whose preconditions are unmet are set
    to ``None`` with a reason recorded, never raised.
    """
    t_start, t_end = window
    if t_end <= t_start:
        raise PreconditionError(f"window end {t_end} must exceed start {t_start}")
    mask = series.valid & (series.t_end > t_start) & (series.t_end <= t_end)
    ibis = series.ibi[mask]
    n = int(ibis.size)

    reasons: dict[str, str] = {}
    hr = sd = si = None
    if n == 0:
        reasons = {k: REASON_NO_VALID_IBIS for k in ("hr_bpm", "sdnn_ms", "stress_si")}
    elif n < 2:
        reasons = {k: REASON_TOO_FEW_IBIS for k in ("hr_bpm", "sdnn_ms", "stress_si")}
    else:
        hr = heart_rate_bpm(ibis)
        sd = sdnn_ms(ibis)
        try:
            si = baevsky_si(ibis)
        except DegenerateWindow:
            reasons["stress_si"] = REASON_DEGENERATE
    return BiometricReading(
        t_start=t_start, t_end=t_end,
        hr_bpm=hr, sdnn_ms=sd, stress_si=si,
        n_ibis=n, reasons=reasons,
    )


def windowed_readings(
    series: IbiSeries,
    t_start: float,
    t_stop: float,
    window_s: float = 60.0,
    min_window_s: float = 10.0,
    step_s: float = 1.0,
) -> list[BiometricReading]:
    """Sliding-window readings over a finished interval series.

    The first reading lands ``min_window_s`` after ``t_start``; until
    the full ``window_s`` of history exists the window grows from
    ``t_start``, afterwards it slides. Mirrors the live monitor's
    warm-up behavior for offline analysis.
    """
    if not (0 < min_window_s <= window_s):
        raise PreconditionError("need 0 < min_window_s <= window_s")
    if step_s <= 0:
        raise PreconditionError("step_s must be > 0")
    out = []
    t = t_start + min_window_s
    while t <= t_stop + 1e-9:
        out.append(reading_for_window(series, (max(t_start, t - window_s), t)))
        t += step_s
    return out
