"""Synthetic RGB traces with exactly known beat times.

The generator is the ground-truth source for end-to-end testing: it
plants a Gaussian-bump pulse train at known beat times into skin-tone
RGB channels, with optional multiplicative illumination drift and
additive sensor noise, and hands back the embedded interval series so
recovered biometrics can be checked against exact truth.

Channel model for frame time t:

    c_i(t) = base_i * (1 - amplitude * rho_i * pulse(t)) * drift(t) + noise

``base`` is an 8-bit-scale skin tone, ``rho`` the per-channel pulsatile
strength (strongest in green), and the minus sign reflects that higher
blood volume absorbs more light. ``noise_std`` is in trace units; real
per-frame means over a large skin region are spatial averages of many
pixels, so values well below one intensity step are realistic. Drift is
common-mode across channels. Everything is deterministic under the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .biometrics import BiometricReading, reading_for_window
from .errors import InvalidSpec
from .extract import RgbTrace
from .peaks import IBI_MAX_S, IBI_MIN_S, IbiSeries
from .signals import UniformSignal

#: Skin-tone channel baselines (R, G, B), 8-bit scale.
BASE_RGB = (180.0, 140.0, 110.0)

#: Relative pulsatile strength per channel.
PULSATILE_RGB = (0.40, 1.00, 0.65)

#: First beat lands this long after the recording starts, seconds.
FIRST_BEAT_S = 0.4

IBI_MODELS = ("fixed", "jittered", "sequence")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic recording."""

    duration_s: float
    fps: float
    base_hr_bpm: float
    hrv_sdnn_ms: float = 0.0
    ibi_model: str = "fixed"
    ibi_sequence: np.ndarray | None = None
    pulse_sigma_s: float = 0.12
    amplitude: float = 0.01
    noise_std: float = 0.0
    drift_amplitude: float = 0.0
    drift_hz: float = 0.0
    seed: int = 0

    def validate(self):
        if self.duration_s <= 0:
            raise InvalidSpec(f"duration_s must be > 0, got {self.duration_s}")
        if self.fps <= 0:
            raise InvalidSpec(f"fps must be > 0, got {self.fps}")
        if not (39.0 <= self.base_hr_bpm <= 210.0):
            raise InvalidSpec(f"base_hr_bpm must be in [39, 210], got {self.base_hr_bpm}")
        if self.hrv_sdnn_ms < 0:
            raise InvalidSpec("hrv_sdnn_ms must be >= 0")
        if self.ibi_model not in IBI_MODELS:
            raise InvalidSpec(f"ibi_model must be one of {IBI_MODELS}")
        if self.ibi_model == "sequence" and self.ibi_sequence is None:
            raise InvalidSpec("ibi_model 'sequence' requires ibi_sequence")
        if self.pulse_sigma_s <= 0:
            raise InvalidSpec("pulse_sigma_s must be > 0")
        if not (0 <= self.amplitude < 1):
            raise InvalidSpec("amplitude must be in [0, 1)")
        if self.noise_std < 0 or self.drift_amplitude < 0 or self.drift_hz < 0:
            raise InvalidSpec("noise and drift parameters must be >= 0")


@dataclass(frozen=True)
class SynthTruth:
    """Exact ground truth embedded in a synthetic trace."""

    beat_times: np.ndarray
    ibis: IbiSeries
    clean_pulse: UniformSignal
    reading: BiometricReading = field(repr=False)


def synth_ibis(spec: SynthSpec, n: int | None = None) -> np.ndarray:
    """Generate the interval sequence for a spec.

    ``fixed`` repeats 60 / base_hr_bpm; ``jittered`` draws from a normal
    with that mean and the requested SDNN, redrawing anything outside
    the validity band; ``sequence`` returns the supplied intervals.
    Without ``n``, enough intervals are produced to span the recording.
    """
    spec.validate()
    if spec.ibi_model == "sequence":
        seq = np.asarray(spec.ibi_sequence, dtype=np.float64)
        return seq[:n] if n is not None else seq

    mean_ibi = 60.0 / spec.base_hr_bpm
    if n is None:
        n = int(np.ceil((spec.duration_s + 2.0) / mean_ibi)) + 2
    if spec.ibi_model == "fixed" or spec.hrv_sdnn_ms == 0.0:
        return np.full(n, mean_ibi)

    rng = np.random.default_rng(spec.seed)
    sd = spec.hrv_sdnn_ms / 1000.0
    out = np.empty(0)
    while out.size < n:
        draw = rng.normal(mean_ibi, sd, 2 * (n - out.size) + 8)
        draw = draw[(draw >= IBI_MIN_S) & (draw <= IBI_MAX_S)]
        out = np.concatenate([out, draw])
    return out[:n]


def _bump_train(t: np.ndarray, beats: np.ndarray, sigma: float) -> np.ndarray:
    """Sum of unit Gaussian bumps at the beat times, sparse evaluation."""
    pulse = np.zeros_like(t)
    if beats.size == 0:
        return pulse
    rate = 1.0 / (t[1] - t[0]) if t.size > 1 else 1.0
    half = 5.0 * sigma
    for b in beats:
        lo = max(0, int((b - half - t[0]) * rate))
        hi = min(t.size, int((b + half - t[0]) * rate) + 2)
        pulse[lo:hi] += np.exp(-0.5 * ((t[lo:hi] - b) / sigma) ** 2)
    return pulse


def synth_trace(spec: SynthSpec) -> tuple[RgbTrace, SynthTruth]:
    """Build the RGB trace and its embedded ground truth.

    The bump width narrows when beats crowd together (capped at 22% of
    the mean interval) so adjacent bumps stay separable at high heart
    rates. Truth readings are computed by the same biometric code used
    on the prediction side, directly on the embedded intervals.
    """
    spec.validate()
    ibis = synth_ibis(spec)
    beats = FIRST_BEAT_S + np.cumsum(ibis)
    beats = beats[beats < spec.duration_s - 0.3]
    if beats.size < 2:
        raise InvalidSpec("recording too short to contain two beats")

    n = int(round(spec.duration_s * spec.fps))
    t = np.arange(n) / spec.fps
    sigma = min(spec.pulse_sigma_s, 0.22 * float(np.mean(np.diff(beats))))
    pulse = _bump_train(t, beats, sigma)

    rng = np.random.default_rng(spec.seed + 1)
    base = np.array(BASE_RGB)
    rho = np.array(PULSATILE_RGB)
    drift = np.ones(n)
    if spec.drift_amplitude > 0 and spec.drift_hz > 0:
        drift += spec.drift_amplitude * np.sin(2 * np.pi * spec.drift_hz * t)
    channels = base[None, :] * (1.0 - spec.amplitude * rho[None, :] * pulse[:, None])
    channels *= drift[:, None]
    if spec.noise_std > 0:
        channels = channels + rng.normal(0.0, spec.noise_std, channels.shape)
    channels = np.maximum(channels, 0.0)

    trace = RgbTrace(
        t=t, r=channels[:, 0], g=channels[:, 1], b=channels[:, 2],
        nominal_rate=spec.fps,
    )
    emb = np.diff(beats)
    series = IbiSeries(
        t_end=beats[1:], ibi=emb,
        valid=(emb >= IBI_MIN_S) & (emb <= IBI_MAX_S),
    )
    truth = SynthTruth(
        beat_times=beats,
        ibis=series,
        clean_pulse=UniformSignal(pulse, spec.fps, 0.0),
        reading=reading_for_window(series, (0.0, spec.duration_s)),
    )
    return trace, truth
