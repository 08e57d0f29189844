"""Benchmark harness: ground-truth protocols and corpus evaluation.

A corpus is a directory of recordings, one subdirectory each, holding

* ``trace.csv``: the per-frame RGB trace (required),
* ``gt_pulse.csv`` or ``gt_ubfc.txt``: a reference pulse wave, for the
  ``peaks`` and ``fft`` protocols,
* ``gt_peaks.txt``: hand-verified peak times in seconds, for the
  ``verified`` protocol.

Ground-truth conditioning follows the conventional recipe: a zero-phase
second-order Butterworth restricted to 0.75-2.5 Hz (45-150 bpm), then
either peak detection (``peaks``) or the dominant FFT frequency times
60 (``fft``). Hand-verified peaks bypass filtering and detection
entirely; their biometrics are exact arithmetic over the peak times.

Per-recording failures are collected into the report rather than
aborting the run. Recordings are processed independently, optionally in
parallel (``PULSELAB_THREADS``), with deterministic output ordering.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import io as plio
from .biometrics import baevsky_si, heart_rate_bpm, hr_from_fft, sdnn_ms
from .errors import (
    DegenerateWindow,
    EmptyInput,
    MissingVerifiedPeaks,
    NoValidIbis,
    PulseLabError,
    TooFewIbis,
)
from .extract import DEFAULT_BAND, DEFAULT_WINDOW_S, ExtractorId, PulseWave, RgbTrace, extract
from .metrics import MetricSet, metric_set
from .peaks import (
    IBI_MAX_S,
    IBI_MIN_S,
    IbiSeries,
    PeakList,
    correct_ibis,
    detect_peaks,
    peaks_to_ibis,
)
from .signals import BandpassSpec, UniformSignal, design_butterworth_bandpass, filter_zero_phase

#: Ground-truth conditioning band, 45-150 bpm.
GROUND_TRUTH_BAND = BandpassSpec(0.75, 2.5, order=2)

BIOMETRIC_FIELDS = ("hr_bpm", "sdnn_ms", "stress_si")


class GroundTruthProtocol(str, Enum):
    PEAKS = "peaks"
    FFT = "fft"
    VERIFIED_PEAKS = "verified"


@dataclass(frozen=True)
class RecordingReading:
    """Whole-recording biometrics; undefined fields are None."""

    hr_bpm: float | None
    sdnn_ms: float | None
    stress_si: float | None


def _biometrics_from_ibis(ibis: np.ndarray) -> RecordingReading:
    if ibis.size == 0:
        raise NoValidIbis("no valid intervals in recording")
    hr = heart_rate_bpm(ibis)
    try:
        sd = sdnn_ms(ibis)
    except TooFewIbis:
        sd = None
    try:
        si = baevsky_si(ibis)
    except (TooFewIbis, DegenerateWindow):
        si = None
    return RecordingReading(hr_bpm=hr, sdnn_ms=sd, stress_si=si)


def _peaks_pipeline_ibis(wave: PulseWave) -> np.ndarray:
    series = correct_ibis(peaks_to_ibis(detect_peaks(wave)))
    return series.valid_ibis()


def ground_truth_readings(
    pulse: UniformSignal,
    protocol: GroundTruthProtocol,
    verified_peaks: np.ndarray | None = None,
) -> RecordingReading:
    """Reference biometrics for one recording under a protocol.

    ``peaks``: zero-phase 0.75-2.5 Hz filter, peak detection, interval
    correction, then heart rate, SDNN and stress. ``fft``: dominant
    in-band frequency times 60, heart rate only. ``verified``: exact
    arithmetic over externally supplied peak times.
    """
    if protocol is GroundTruthProtocol.VERIFIED_PEAKS:
        if verified_peaks is None:
            raise MissingVerifiedPeaks("verified protocol needs a peak-time list")
        times = np.asarray(verified_peaks, dtype=np.float64)
        ibis = np.diff(times)
        ibis = ibis[(ibis >= IBI_MIN_S) & (ibis <= IBI_MAX_S)]
        return _biometrics_from_ibis(ibis)
    if protocol is GroundTruthProtocol.FFT:
        return RecordingReading(
            hr_bpm=hr_from_fft(pulse, GROUND_TRUTH_BAND), sdnn_ms=None, stress_si=None
        )
    coeffs = design_butterworth_bandpass(GROUND_TRUTH_BAND, pulse.sample_rate)
    filtered = filter_zero_phase(pulse, coeffs)
    return _biometrics_from_ibis(
        _peaks_pipeline_ibis(PulseWave(filtered, GROUND_TRUTH_BAND))
    )


def predict_recording(
    trace: RgbTrace,
    extractor: ExtractorId,
    protocol: GroundTruthProtocol,
    band: BandpassSpec = DEFAULT_BAND,
    window_s: float = DEFAULT_WINDOW_S,
) -> RecordingReading:
    """Predicted biometrics for one recording.

    For the ``fft`` protocol the extracted wave goes through the same
    spectral procedure as the ground truth (heart rate only); otherwise
    intervals come from peak detection on the extracted wave.
    """
    wave = extract(extractor, trace, trace.nominal_rate, band, window_s)
    if protocol is GroundTruthProtocol.FFT:
        return RecordingReading(
            hr_bpm=hr_from_fft(wave, GROUND_TRUTH_BAND), sdnn_ms=None, stress_si=None
        )
    return _biometrics_from_ibis(_peaks_pipeline_ibis(wave))


@dataclass(frozen=True)
class Recording:
    """One loaded corpus entry."""

    name: str
    trace: RgbTrace
    gt_pulse: UniformSignal | None = None
    gt_peaks: np.ndarray | None = None


def load_recording(directory) -> Recording:
    """Load a recording directory (trace plus whatever ground truth exists)."""
    directory = Path(directory)
    trace = plio.read_trace_csv(directory / "trace.csv")
    gt_pulse = None
    if (directory / "gt_pulse.csv").exists():
        gt_pulse = plio.read_pulse_csv(directory / "gt_pulse.csv")
    elif (directory / "gt_ubfc.txt").exists():
        gt_pulse = plio.ubfc_pulse_signal(directory / "gt_ubfc.txt")
    gt_peaks = None
    if (directory / "gt_peaks.txt").exists():
        gt_peaks = plio.read_peaks_file(directory / "gt_peaks.txt")
    return Recording(name=directory.name, trace=trace, gt_pulse=gt_pulse, gt_peaks=gt_peaks)


def discover_corpus(corpus_dir) -> list[Path]:
    """Recording directories under a corpus root, sorted by name."""
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise EmptyInput(f"corpus directory {corpus_dir} does not exist")
    dirs = sorted(p for p in corpus_dir.iterdir() if (p / "trace.csv").is_file())
    if not dirs:
        raise EmptyInput(f"no recordings under {corpus_dir}")
    return dirs


@dataclass(frozen=True)
class RecordingResult:
    name: str
    error: str | None = None
    pred: RecordingReading | None = None
    target: RecordingReading | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class EvalReport:
    """Per-recording results plus one metric set per biometric."""

    extractor: ExtractorId
    protocol: GroundTruthProtocol
    results: list[RecordingResult]
    metrics: dict[str, MetricSet | None]

    @property
    def n_ok(self) -> int:
        return sum(1 for r in self.results if r.ok)

    def pairs(self, fieldname: str) -> tuple[np.ndarray, np.ndarray]:
        """Aligned (pred, target) arrays where both sides are defined."""
        pred, target = [], []
        for r in self.results:
            if not r.ok:
                continue
            p = getattr(r.pred, fieldname)
            g = getattr(r.target, fieldname)
            if p is not None and g is not None:
                pred.append(p)
                target.append(g)
        return np.array(pred), np.array(target)


def _evaluate_one(source, extractor, protocol, band, window_s) -> RecordingResult:
    name = source.name if isinstance(source, (Path, Recording)) else str(source)
    try:
        rec = source if isinstance(source, Recording) else load_recording(source)
        name = rec.name
        if protocol is GroundTruthProtocol.VERIFIED_PEAKS:
            target = ground_truth_readings(None, protocol, rec.gt_peaks)
        else:
            if rec.gt_pulse is None:
                raise EmptyInput(f"{name}: no ground-truth pulse wave")
            target = ground_truth_readings(rec.gt_pulse, protocol)
        pred = predict_recording(rec.trace, extractor, protocol, band, window_s)
        return RecordingResult(name=name, pred=pred, target=target)
    except (PulseLabError, OSError) as exc:
        return RecordingResult(name=name, error=f"{type(exc).__name__}: {exc}")


def evaluate_corpus(
    sources,
    extractor: ExtractorId = ExtractorId.POS,
    protocol: GroundTruthProtocol = GroundTruthProtocol.PEAKS,
    band: BandpassSpec = DEFAULT_BAND,
    window_s: float = DEFAULT_WINDOW_S,
    threads: int | None = None,
) -> EvalReport:
    """Evaluate every recording and aggregate the four metrics.

    ``sources`` are recording directories or preloaded ``Recording``
    objects. A failing recording becomes a failure entry in the report.
    """
    sources = list(sources)
    if not sources:
        raise EmptyInput("empty corpus")
    if threads is None:
        threads = int(os.environ.get("PULSELAB_THREADS", "1") or "1")
    threads = max(1, threads)

    def work(src):
        return _evaluate_one(src, extractor, protocol, band, window_s)

    if threads == 1 or len(sources) == 1:
        results = [work(s) for s in sources]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, sources))

    report = EvalReport(extractor=extractor, protocol=protocol, results=results, metrics={})
    metrics: dict[str, MetricSet | None] = {}
    for fieldname in BIOMETRIC_FIELDS:
        pred, target = report.pairs(fieldname)
        metrics[fieldname] = metric_set(pred, target) if pred.size else None
    return EvalReport(
        extractor=extractor, protocol=protocol, results=results, metrics=metrics
    )


def write_report_csv(path, report: EvalReport):
    """Per-recording rows followed by a summary block of the metrics."""

    def fmt(x, digits=4):
        return "" if x is None else f"{x:.{digits}f}"

    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("recording,status,hr_pred,hr_target,sdnn_pred,sdnn_target,"
                 "stress_pred,stress_target\n")
        for r in report.results:
            if not r.ok:
                fh.write(f"{r.name},failed: {r.error},,,,,,\n")
                continue
            fh.write(
                f"{r.name},ok,"
                f"{fmt(r.pred.hr_bpm)},{fmt(r.target.hr_bpm)},"
                f"{fmt(r.pred.sdnn_ms)},{fmt(r.target.sdnn_ms)},"
                f"{fmt(r.pred.stress_si)},{fmt(r.target.stress_si)}\n"
            )
        fh.write("\n")
        fh.write("# summary\n")
        fh.write("biometric,n,mae,mape_pct,rmse,pearson\n")
        for fieldname in BIOMETRIC_FIELDS:
            ms = report.metrics.get(fieldname)
            if ms is None:
                fh.write(f"{fieldname},0,,,,\n")
            else:
                fh.write(
                    f"{fieldname},{ms.n},{fmt(ms.mae)},{fmt(ms.mape_pct)},"
                    f"{fmt(ms.rmse)},{fmt(ms.pearson)}\n"
                )


def format_summary(report: EvalReport) -> str:
    """Human-readable summary table for the terminal."""
    lines = [
        f"extractor={report.extractor.value} protocol={report.protocol.value} "
        f"recordings={len(report.results)} ok={report.n_ok}",
        f"{'biometric':<12}{'n':>4}{'MAE':>10}{'MAPE%':>10}{'RMSE':>10}{'pearson':>10}",
    ]
    for fieldname in BIOMETRIC_FIELDS:
        ms = report.metrics.get(fieldname)
        if ms is None:
            lines.append(f"{fieldname:<12}{0:>4}{'-':>10}{'-':>10}{'-':>10}{'-':>10}")
        else:
            def cell(x):
                return f"{x:.3f}" if x is not None else "-"
            lines.append(
                f"{fieldname:<12}{ms.n:>4}{cell(ms.mae):>10}{cell(ms.mape_pct):>10}"
                f"{cell(ms.rmse):>10}{cell(ms.pearson):>10}"
            )
    return "\n".join(lines)
