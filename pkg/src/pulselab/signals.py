"""Core time-series types and filtering.

Foundation used by every other module: uniformly sampled signals,
linear-interpolation resampling of jittery frame timestamps, moving-mean
detrending, and second-order Butterworth bandpass filtering in both a
causal (streaming) and a zero-phase (offline) variant.

All functions are pure: inputs are never mutated and identical inputs
produce identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .errors import (
    EmptySignal,
    InvalidBand,
    NonMonotonicTimestamps,
    PreconditionError,
    SignalTooShort,
    TooFewSamples,
)

# Tolerance, in fractional grid steps, when deciding how many resampling
# grid points fit inside the input span. Absorbs timestamp round-off
# without ever extrapolating by more than a few nanoseconds.
_GRID_EPS = 1e-7


@dataclass(frozen=True)
class UniformSignal:
    """A finite 1-D signal on a uniform time grid.

    Sample ``k`` sits at time ``t0 + k / sample_rate`` seconds.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if self.sample_rate <= 0:
            raise PreconditionError(f"sample_rate must be > 0, got {self.sample_rate}")
        if samples.ndim != 1:
            raise PreconditionError("samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise PreconditionError("samples must be finite")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        """Span in seconds from the first to the last sample."""
        if len(self) < 2:
            return 0.0
        return (len(self) - 1) / self.sample_rate

    def times(self) -> np.ndarray:
        """Timestamps of every sample, seconds."""
        return self.t0 + np.arange(len(self)) / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "UniformSignal":
        """Same grid, different values."""
        return UniformSignal(samples, self.sample_rate, self.t0)


@dataclass(frozen=True)
class BandpassSpec:
    """A bandpass definition: keep frequencies in [low_hz, high_hz]."""

    low_hz: float
    high_hz: float
    order: int = 2

    def __post_init__(self):
        if self.order < 1:
            raise InvalidBand(f"filter order must be >= 1, got {self.order}")
        if not (0 < self.low_hz < self.high_hz):
            raise InvalidBand(
                f"need 0 < low < high, got low={self.low_hz}, high={self.high_hz}"
            )


@dataclass(frozen=True)
class FilterCoefficients:
    """Discrete-time biquad cascade realizing a bandpass at one rate."""

    sos: np.ndarray = field(repr=False)
    band: BandpassSpec
    sample_rate: float

    @property
    def n_sections(self) -> int:
        return self.sos.shape[0]

    @property
    def effective_order(self) -> int:
        """Order of the overall transfer function (2 per section)."""
        return 2 * self.n_sections


def resample_uniform(t: np.ndarray, values: np.ndarray, target_rate: float) -> UniformSignal:
    """Linearly interpolate timestamped samples onto a uniform grid.

    The grid is ``t[0] + k / target_rate`` for k = 0, 1, ... and covers
    the input span without extrapolating past either endpoint. Input
    already on the target grid passes through unchanged.

    Parameters
    ----------
    t : array of seconds, strictly increasing, length >= 2
    values : array of sample values, same length as ``t``
    target_rate : grid rate in Hz, > 0

    Raises
    ------
    TooFewSamples, NonMonotonicTimestamps
    """
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if t.size != values.size:
        raise PreconditionError("t and values must have equal length")
    if t.size < 2:
        raise TooFewSamples(f"resampling needs >= 2 samples, got {t.size}")
    if target_rate <= 0:
        raise PreconditionError(f"target_rate must be > 0, got {target_rate}")
    if np.any(np.diff(t) <= 0):
        raise NonMonotonicTimestamps("timestamps must be strictly increasing")

    t0 = float(t[0])
    span_steps = (t[-1] - t0) * target_rate
    n = int(np.floor(span_steps + _GRID_EPS)) + 1
    grid = t0 + np.arange(n) / target_rate
    return UniformSignal(np.interp(grid, t, values), target_rate, t0)


def detrend_moving_mean(sig: UniformSignal, window_s: float) -> UniformSignal:
    """Subtract a centered moving mean, windows shrinking at the edges.

    The window holds ``round(window_s * sample_rate)`` samples; near the
    boundaries it is truncated to the available data rather than padded.
    """
    if len(sig) == 0:
        raise EmptySignal("cannot detrend an empty signal")
    if window_s <= 0:
        raise PreconditionError(f"window_s must be > 0, got {window_s}")

    n = len(sig)
    w = max(1, int(round(window_s * sig.sample_rate)))
    left = (w - 1) // 2
    right = w // 2

    cs = np.concatenate(([0.0], np.cumsum(sig.samples)))
    hi = np.minimum(np.arange(n) + right + 1, n)
    lo = np.maximum(np.arange(n) - left, 0)
    means = (cs[hi] - cs[lo]) / (hi - lo)
    return sig.with_samples(sig.samples - means)


def design_butterworth_bandpass(spec: BandpassSpec, sample_rate: float) -> FilterCoefficients:
    """Design a Butterworth bandpass as cascaded second-order sections.

    Uses the bilinear transform with frequency pre-warping, so the
    magnitude response is exactly -3 dB at both band edges and zero at
    DC and Nyquist. Sections keep the realization stable at the low
    normalized frequencies typical of camera frame rates.

    Raises
    ------
    InvalidBand
        If the edges do not satisfy 0 < low < high < sample_rate / 2.
    """
    nyq = sample_rate / 2.0
    if not (0 < spec.low_hz < spec.high_hz < nyq):
        raise InvalidBand(
            f"band [{spec.low_hz}, {spec.high_hz}] Hz invalid at {sample_rate} Hz"
        )
    sos = sps.butter(
        spec.order,
        [spec.low_hz, spec.high_hz],
        btype="bandpass",
        fs=sample_rate,
        output="sos",
    )
    return FilterCoefficients(sos=sos, band=spec, sample_rate=sample_rate)


def _check_rate(sig: UniformSignal, coeffs: FilterCoefficients):
    if abs(sig.sample_rate - coeffs.sample_rate) > 1e-9 * coeffs.sample_rate:
        raise PreconditionError(
            f"filter designed for {coeffs.sample_rate} Hz, signal is {sig.sample_rate} Hz"
        )


def filter_causal(sig: UniformSignal, coeffs: FilterCoefficients) -> UniformSignal:
    """Direct-form filtering with zero initial state (streaming-safe)."""
    if len(sig) == 0:
        raise EmptySignal("cannot filter an empty signal")
    _check_rate(sig, coeffs)
    return sig.with_samples(sps.sosfilt(coeffs.sos, sig.samples))


def filter_zero_phase(sig: UniformSignal, coeffs: FilterCoefficients) -> UniformSignal:
    """Forward-backward filtering: no phase shift, peaks stay put.

    Runs the cascade forward, reverses, runs it again and reverses back,
    squaring the magnitude response and cancelling the phase. Offline
    use only; requires a signal longer than three times the effective
    filter order.
    """
    _check_rate(sig, coeffs)
    n = len(sig)
    min_len = 3 * coeffs.effective_order
    if n <= min_len:
        raise SignalTooShort(f"zero-phase filtering needs > {min_len} samples, got {n}")
    padlen = min(3 * (2 * coeffs.n_sections + 1), n - 1)
    return sig.with_samples(sps.sosfiltfilt(coeffs.sos, sig.samples, padlen=padlen))
