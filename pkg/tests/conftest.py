"""Shared builders for synthetic inputs used across the test suite."""

import numpy as np
import pytest

from pulselab import RgbTrace, SynthSpec, UniformSignal, synth_trace


def sine_signal(freq_hz, duration_s=60.0, rate=30.0, phase=0.0, t0=0.0):
    t = np.arange(int(round(duration_s * rate))) / rate
    return UniformSignal(np.sin(2 * np.pi * freq_hz * t + phase), rate, t0)


def aligned_cosine(freq_hz=1.0, duration_s=10.0, rate=30.0, crest_index=8):
    """Cosine whose crests land exactly on sample indices."""
    n = int(round(duration_s * rate))
    k = np.arange(n)
    return UniformSignal(np.cos(2 * np.pi * freq_hz * (k - crest_index) / rate), rate, 0.0)


def bump_train(beat_times, duration_s, rate=30.0, sigma_s=0.1):
    """Sum of Gaussian bumps at the given times."""
    t = np.arange(int(round(duration_s * rate))) / rate
    out = np.zeros_like(t)
    for b in beat_times:
        out += np.exp(-0.5 * ((t - b) / sigma_s) ** 2)
    return UniformSignal(out, rate, 0.0)


def flat_trace(value=(120.0, 100.0, 90.0), duration_s=20.0, fps=30.0):
    n = int(round(duration_s * fps))
    t = np.arange(n) / fps
    return RgbTrace(
        t=t,
        r=np.full(n, value[0]),
        g=np.full(n, value[1]),
        b=np.full(n, value[2]),
        nominal_rate=fps,
    )


def modulated_trace(freq_hz, duration_s=60.0, fps=30.0, depth=0.01,
                    rho=(0.40, 1.00, 0.65), base=(180.0, 140.0, 110.0)):
    """Skin-like trace with a sinusoidal pulse modulation (intensity dips)."""
    n = int(round(duration_s * fps))
    t = np.arange(n) / fps
    pulse = np.sin(2 * np.pi * freq_hz * t)
    chans = [b0 * (1.0 - depth * r0 * pulse) for b0, r0 in zip(base, rho)]
    return RgbTrace(t=t, r=chans[0], g=chans[1], b=chans[2], nominal_rate=fps)


def flicker_trace(freq_hz=1.0, duration_s=60.0, fps=30.0, depth=0.05,
                  base=(180.0, 140.0, 110.0)):
    """All channels share one multiplicative intensity flicker."""
    n = int(round(duration_s * fps))
    t = np.arange(n) / fps
    gain = 1.0 + depth * np.sin(2 * np.pi * freq_hz * t)
    return RgbTrace(
        t=t, r=base[0] * gain, g=base[1] * gain, b=base[2] * gain, nominal_rate=fps
    )


def dominant_frequency(sig: UniformSignal) -> float:
    """Spectral argmax via a plain FFT, independent of the library path."""
    spec = np.abs(np.fft.rfft(sig.samples - sig.samples.mean()))
    freqs = np.fft.rfftfreq(len(sig), 1.0 / sig.sample_rate)
    return float(freqs[np.argmax(spec)])


@pytest.fixture
def noisy_recording():
    """A realistic 60 s jittered recording with drift and sensor noise."""
    spec = SynthSpec(
        duration_s=60.0, fps=30.0, base_hr_bpm=72.0, hrv_sdnn_ms=40.0,
        ibi_model="jittered", amplitude=0.01, noise_std=0.02,
        drift_amplitude=0.05, drift_hz=0.2, seed=11,
    )
    return synth_trace(spec)
