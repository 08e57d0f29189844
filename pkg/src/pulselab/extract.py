"""Pulse-wave extraction from per-frame mean skin RGB traces.

Three classical extractors behind one dispatch:

* GREEN: the detrended, bandpassed (and negated) green channel, the
  simplest luminance baseline.
* CHROM: chrominance projections X = 3Rn - 2Gn, Y = 1.5Rn + Gn - 1.5Bn
  on temporally normalized channels, combined as h = X - (sX/sY) * Y
  per window.
* POS: projections S1 = Gn - Bn, S2 = Gn + Bn - 2Rn on temporally
  normalized channels, combined as h = S1 + (s1/s2) * S2 per window.

CHROM and POS run on overlapped windows (50% overlap, Hann-weighted
overlap-add); temporal normalization divides each channel by its mean
within the window, which cancels common-mode intensity changes such as
lighting flicker. Output polarity is oriented so that heartbeats appear
as local maxima for skin-like pulsatile modulation (blood volume rises,
reflected intensity dips, strongest in green).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal.windows import hann

from .errors import TooFewSamples, NonMonotonicTimestamps, PreconditionError
from .signals import (
    BandpassSpec,
    UniformSignal,
    design_butterworth_bandpass,
    detrend_moving_mean,
    filter_causal,
    filter_zero_phase,
    resample_uniform,
)

#: Operating band for the 39-210 bpm heart-rate range.
DEFAULT_BAND = BandpassSpec(39 / 60.0, 210 / 60.0, order=2)

#: Window length for the windowed extractors, seconds.
DEFAULT_WINDOW_S = 1.6

#: Moving-mean width used to strip illumination drift from the green channel.
GREEN_DETREND_WINDOW_S = 3.0


class ExtractorId(str, Enum):
    GREEN = "green"
    CHROM = "chrom"
    POS = "pos"


@dataclass(frozen=True)
class RgbTrace:
    """Timestamped per-frame mean RGB values of a skin region.

    Channel values are mean pixel intensities on any consistent scale;
    timestamps are seconds since stream start and strictly increasing.
    """

    t: np.ndarray
    r: np.ndarray
    g: np.ndarray
    b: np.ndarray
    nominal_rate: float

    def __post_init__(self):
        for name in ("t", "r", "g", "b"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
        n = self.t.size
        if any(getattr(self, name).size != n for name in ("r", "g", "b")):
            raise PreconditionError("trace channel arrays must share one length")
        if self.nominal_rate <= 0:
            raise PreconditionError(f"nominal_rate must be > 0, got {self.nominal_rate}")
        if n >= 2 and np.any(np.diff(self.t) <= 0):
            raise NonMonotonicTimestamps("trace timestamps must be strictly increasing")
        for name in ("r", "g", "b"):
            ch = getattr(self, name)
            if ch.size and (not np.all(np.isfinite(ch)) or np.any(ch < 0)):
                raise PreconditionError(f"channel {name} must be finite and non-negative")

    def __len__(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class PulseWave:
    """A uniformly sampled pulse signal and the band it was filtered to."""

    signal: UniformSignal
    band: BandpassSpec


def _bandpass(sig: UniformSignal, band: BandpassSpec, causal: bool) -> UniformSignal:
    coeffs = design_butterworth_bandpass(band, sig.sample_rate)
    return filter_causal(sig, coeffs) if causal else filter_zero_phase(sig, coeffs)


def _resample_channels(trace: RgbTrace, rate: float):
    r = resample_uniform(trace.t, trace.r, rate)
    g = resample_uniform(trace.t, trace.g, rate)
    b = resample_uniform(trace.t, trace.b, rate)
    return r, g, b


def _normalize(ch: np.ndarray) -> np.ndarray:
    """Divide a channel window by its mean; an all-zero window maps to ones."""
    m = ch.mean()
    if m == 0.0:
        return np.ones_like(ch)
    return ch / m


def chrom_window(r: np.ndarray, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Chrominance combination for one window, mean-centered.

    Falls back to the X projection alone when Y has zero spread (for
    example a constant window), which yields zero after centering.
    """
    rn, gn, bn = _normalize(r), _normalize(g), _normalize(b)
    x = 3.0 * rn - 2.0 * gn
    y = 1.5 * rn + gn - 1.5 * bn
    sy = y.std()
    h = x if sy == 0.0 else x - (x.std() / sy) * y
    return h - h.mean()


def pos_window(r: np.ndarray, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Skin-orthogonal projection for one window, mean-centered.

    Falls back to S1 alone when S2 has zero spread.
    """
    rn, gn, bn = _normalize(r), _normalize(g), _normalize(b)
    s1 = gn - bn
    s2 = gn + bn - 2.0 * rn
    sd2 = s2.std()
    h = s1 if sd2 == 0.0 else s1 + (s1.std() / sd2) * s2
    return h - h.mean()


def overlap_add(
    channels: tuple[np.ndarray, np.ndarray, np.ndarray],
    window_len: int,
    project,
) -> np.ndarray:
    """Apply a per-window projection with Hann-weighted 50% overlap-add.

    Window starts advance by half the window length; a final window is
    anchored at the end so every sample is covered. The accumulated
    output is divided by the accumulated window weight, which is exactly
    1 in the interior for the periodic Hann at 50% overlap.
    """
    r, g, b = channels
    n = r.size
    hop = window_len // 2
    w = hann(window_len, sym=False)
    out = np.zeros(n)
    weight = np.zeros(n)
    starts = list(range(0, n - window_len + 1, hop))
    if not starts or starts[-1] != n - window_len:
        starts.append(n - window_len)
    for s in starts:
        sl = slice(s, s + window_len)
        out[sl] += w * project(r[sl], g[sl], b[sl])
        weight[sl] += w
    covered = weight > 1e-12
    out[covered] /= weight[covered]
    out[~covered] = 0.0
    return out


def extract_green(
    trace: RgbTrace,
    rate: float,
    band: BandpassSpec = DEFAULT_BAND,
    causal: bool = False,
) -> PulseWave:
    """Green-channel pulse extraction.

    Resamples the green channel to ``rate``, removes slow drift with a
    moving mean, bandpasses to ``band`` and negates so that blood-volume
    peaks become local maxima.
    """
    if len(trace) < 2:
        raise TooFewSamples(f"extraction needs >= 2 samples, got {len(trace)}")
    g = resample_uniform(trace.t, trace.g, rate)
    g = detrend_moving_mean(g, GREEN_DETREND_WINDOW_S)
    filtered = _bandpass(g, band, causal)
    return PulseWave(filtered.with_samples(-filtered.samples), band)


def _extract_windowed(
    trace: RgbTrace,
    rate: float,
    band: BandpassSpec,
    window_s: float,
    project,
    negate: bool,
    causal: bool,
) -> PulseWave:
    if window_s <= 0:
        raise PreconditionError(f"window_s must be > 0, got {window_s}")
    if len(trace) < 2:
        raise TooFewSamples(f"extraction needs >= 2 samples, got {len(trace)}")
    r, g, b = _resample_channels(trace, rate)
    window_len = max(2, int(round(window_s * rate)))
    if len(r) < window_len:
        raise TooFewSamples(
            f"need >= {window_len} resampled samples for a {window_s} s window, got {len(r)}"
        )
    h = overlap_add((r.samples, g.samples, b.samples), window_len, project)
    raw = UniformSignal(h, rate, r.t0)
    filtered = _bandpass(raw, band, causal)
    if negate:
        filtered = filtered.with_samples(-filtered.samples)
    return PulseWave(filtered, band)


def extract_chrom(
    trace: RgbTrace,
    rate: float,
    band: BandpassSpec = DEFAULT_BAND,
    window_s: float = DEFAULT_WINDOW_S,
    causal: bool = False,
) -> PulseWave:
    """Chrominance-projection pulse extraction."""
    return _extract_windowed(trace, rate, band, window_s, chrom_window, False, causal)


def extract_pos(
    trace: RgbTrace,
    rate: float,
    band: BandpassSpec = DEFAULT_BAND,
    window_s: float = DEFAULT_WINDOW_S,
    causal: bool = False,
) -> PulseWave:
    """Skin-orthogonal-projection pulse extraction (the default)."""
    return _extract_windowed(trace, rate, band, window_s, pos_window, True, causal)


def extract(
    extractor: ExtractorId,
    trace: RgbTrace,
    rate: float,
    band: BandpassSpec = DEFAULT_BAND,
    window_s: float = DEFAULT_WINDOW_S,
    causal: bool = False,
) -> PulseWave:
    """Dispatch to one of the extractors."""
    if extractor is ExtractorId.GREEN:
        return extract_green(trace, rate, band, causal)
    if extractor is ExtractorId.CHROM:
        return extract_chrom(trace, rate, band, window_s, causal)
    if extractor is ExtractorId.POS:
        return extract_pos(trace, rate, band, window_s, causal)
    raise PreconditionError(f"unknown extractor {extractor!r}")
