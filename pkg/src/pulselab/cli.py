"""Command-line interface.

Subcommands: ``synth`` (generate a trace with ground truth), ``extract``
(trace to pulse wave), ``analyze`` (pulse wave or interval file to
windowed readings), ``monitor`` (replay a trace through the streaming
session), ``eval`` (score a corpus against a ground-truth protocol).

Exit codes: 0 success, 1 input or format error, 2 precondition
violation (including bad flags), 3 internal failure. Report paths also
render figures next to the delimited output unless ``--no-figures``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as plio
from .biometrics import windowed_readings
from .errors import FormatError, PreconditionError, PulseLabError
from .evaluate import (
    GroundTruthProtocol,
    discover_corpus,
    evaluate_corpus,
    format_summary,
    write_report_csv,
)
from .extract import DEFAULT_BAND, ExtractorId, PulseWave, extract
from .monitor import MonitorConfig, MonitorSession, per_frame_budget_check
from .peaks import IbiSeries, correct_ibis, detect_peaks, ibi_in_band, peaks_to_ibis
from .signals import BandpassSpec
from .synth import SynthSpec, synth_trace

EXIT_OK = 0
EXIT_FORMAT = 1
EXIT_PRECONDITION = 2
EXIT_INTERNAL = 3


def _parse_band(text: str) -> BandpassSpec:
    try:
        low, high = (float(x) for x in text.split(","))
    except ValueError:
        raise PreconditionError(f"--band expects 'low,high' in Hz, got {text!r}")
    return BandpassSpec(low, high, order=2)


def _parse_drift(text: str) -> tuple[float, float]:
    try:
        amp, hz = (float(x) for x in text.split(","))
    except ValueError:
        raise PreconditionError(f"--drift expects 'amplitude,hz', got {text!r}")
    return amp, hz


def cmd_synth(args) -> int:
    drift_amp, drift_hz = _parse_drift(args.drift) if args.drift else (0.0, 0.0)
    spec = SynthSpec(
        duration_s=args.duration,
        fps=args.fps,
        base_hr_bpm=args.hr,
        hrv_sdnn_ms=args.sdnn,
        ibi_model="jittered" if args.sdnn > 0 else "fixed",
        amplitude=args.amplitude,
        noise_std=args.noise,
        drift_amplitude=drift_amp,
        drift_hz=drift_hz,
        seed=args.seed,
    )
    trace, truth = synth_trace(spec)
    plio.write_trace_csv(args.output, trace)
    if args.truth:
        truth_dir = Path(args.truth)
        truth_dir.mkdir(parents=True, exist_ok=True)
        plio.write_pulse_csv(truth_dir / "gt_pulse.csv", truth.clean_pulse)
        plio.write_peaks_file(truth_dir / "gt_peaks.txt", truth.beat_times)
        plio.write_ibi_file(truth_dir / "gt_ibis.txt", truth.ibis.ibi)
    reading = truth.reading
    print(
        f"wrote {args.output}: {len(trace)} frames @ {args.fps:g} fps, "
        f"{len(truth.beat_times)} beats, hr {reading.hr_bpm:.2f} bpm, "
        f"sdnn {reading.sdnn_ms:.2f} ms"
    )
    return EXIT_OK


def cmd_extract(args) -> int:
    trace = plio.read_trace_csv(args.input, nominal_rate=args.rate)
    band = _parse_band(args.band)
    wave = extract(ExtractorId(args.algo), trace, trace.nominal_rate, band)
    plio.write_pulse_csv(args.output, wave.signal)
    print(
        f"wrote {args.output}: {len(wave.signal)} samples @ "
        f"{wave.signal.sample_rate:g} Hz, band {band.low_hz:g}-{band.high_hz:g} Hz"
    )
    return EXIT_OK


def _ibis_from_pulse(path) -> tuple[IbiSeries, float, float]:
    sig = plio.read_pulse_csv(path)
    wave = PulseWave(sig, DEFAULT_BAND)
    series = correct_ibis(peaks_to_ibis(detect_peaks(wave)))
    return series, sig.t0, sig.t0 + sig.duration_s


def _ibis_from_file(path) -> tuple[IbiSeries, float, float]:
    ibis = plio.read_ibi_file(path)
    t_end = np.cumsum(ibis)
    valid = np.array([ibi_in_band(x) for x in ibis])
    series = correct_ibis(IbiSeries(t_end, ibis, valid))
    return series, 0.0, float(t_end[-1])


def cmd_analyze(args) -> int:
    if args.min_window > args.window:
        raise PreconditionError(
            f"--min-window ({args.min_window}) must not exceed --window ({args.window})"
        )
    if args.pulse:
        series, t_start, t_stop = _ibis_from_pulse(args.pulse)
    else:
        series, t_start, t_stop = _ibis_from_file(args.ibis)
    readings = windowed_readings(
        series, t_start, t_stop,
        window_s=args.window, min_window_s=args.min_window, step_s=args.step,
    )
    plio.write_readings_csv(args.output, readings)
    print(f"wrote {args.output}: {len(readings)} readings")
    if not args.no_figures and readings:
        from .figures import save_readings_timeline

        fig_path = Path(args.output).with_suffix("").with_name(
            Path(args.output).stem + "_timeline.png"
        )
        save_readings_timeline(readings, fig_path, window_s=args.window)
        print(f"wrote {fig_path}")
    return EXIT_OK


def cmd_monitor(args) -> int:
    if args.min_window > args.window:
        raise PreconditionError(
            f"--min-window ({args.min_window}) must not exceed --window ({args.window})"
        )
    trace = plio.read_trace_csv(args.input, nominal_rate=args.rate)
    config = MonitorConfig(
        extractor=ExtractorId(args.algo),
        nominal_rate=trace.nominal_rate,
        window_s=args.window,
        min_window_s=args.min_window,
        update_period_s=args.step,
    )
    session = MonitorSession(config)
    readings = session.push(trace.t, trace.r, trace.g, trace.b)
    plio.write_readings_csv(args.output, readings)
    print(f"wrote {args.output}: {len(readings)} readings from {len(trace)} frames")
    if args.budget:
        stats = per_frame_budget_check(session)
        print(
            f"per-frame: mean {stats.mean_s * 1000:.3f} ms, "
            f"p95 {stats.p95_s * 1000:.3f} ms, max {stats.max_s * 1000:.3f} ms "
            f"over {stats.n_frames} frames"
        )
    if not args.no_figures and readings:
        from .figures import save_readings_timeline

        fig_path = Path(args.output).with_suffix("").with_name(
            Path(args.output).stem + "_timeline.png"
        )
        save_readings_timeline(readings, fig_path, window_s=args.window)
        print(f"wrote {fig_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    sources = discover_corpus(args.corpus)
    report = evaluate_corpus(
        sources,
        extractor=ExtractorId(args.algo),
        protocol=GroundTruthProtocol(args.protocol),
        threads=args.threads,
    )
    write_report_csv(args.output, report)
    print(format_summary(report))
    print(f"wrote {args.output}")
    if not args.no_figures:
        from .figures import save_eval_scatters

        stem = Path(args.output).with_suffix("")
        for fig_path in save_eval_scatters(report, stem):
            print(f"wrote {fig_path}")
    return EXIT_OK if report.n_ok >= 1 else EXIT_FORMAT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulselab",
        description="Pulse-wave biometrics from RGB traces: synthesis, "
                    "extraction, analysis, streaming replay and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic trace with ground truth")
    p.add_argument("--duration", type=float, required=True, help="seconds")
    p.add_argument("--fps", type=float, required=True, help="frames per second")
    p.add_argument("--hr", type=float, required=True, help="base heart rate, bpm")
    p.add_argument("--sdnn", type=float, default=0.0, help="interval jitter, ms")
    p.add_argument("--amplitude", type=float, default=0.01,
                   help="fractional pulse modulation depth")
    p.add_argument("--noise", type=float, default=0.0, help="sensor noise, trace units")
    p.add_argument("--drift", default=None, help="illumination drift 'amplitude,hz'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="trace CSV path")
    p.add_argument("--truth", default=None, help="directory for ground-truth files")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract a pulse wave from a trace")
    p.add_argument("--algo", choices=[e.value for e in ExtractorId], required=True)
    p.add_argument("--input", required=True, help="trace CSV")
    p.add_argument("--band", default="0.65,3.5", help="bandpass 'low,high' in Hz")
    p.add_argument("--rate", type=float, default=None,
                   help="resampling rate, Hz (default: inferred)")
    p.add_argument("-o", "--output", required=True, help="pulse-wave CSV path")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="windowed readings from a pulse wave or intervals")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--pulse", help="pulse-wave CSV")
    src.add_argument("--ibis", help="interval file, integer milliseconds per line")
    p.add_argument("--window", type=float, default=60.0)
    p.add_argument("--min-window", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-o", "--output", required=True, help="readings CSV path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("monitor", help="replay a trace through the streaming session")
    p.add_argument("--input", required=True, help="trace CSV")
    p.add_argument("--algo", choices=[e.value for e in ExtractorId], default="pos")
    p.add_argument("--window", type=float, default=60.0)
    p.add_argument("--min-window", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=None,
                   help="nominal rate, Hz (default: inferred)")
    p.add_argument("--budget", action="store_true", help="print per-frame timing stats")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-o", "--output", required=True, help="readings CSV path")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("eval", help="evaluate a corpus of recordings")
    p.add_argument("--corpus", required=True, help="directory of recording subdirectories")
    p.add_argument("--algo", choices=[e.value for e in ExtractorId], default="pos")
    p.add_argument("--protocol", choices=[e.value for e in GroundTruthProtocol],
                   default="peaks")
    p.add_argument("--threads", type=int, default=None,
                   help="parallel recordings (default: PULSELAB_THREADS or 1)")
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("-o", "--output", required=True, help="report CSV path")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except PulseLabError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
