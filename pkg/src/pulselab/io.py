"""File formats: traces, pulse waves, interval and peak lists, reports.

All text files are UTF-8 with LF line endings. Timestamps in CSV files
are milliseconds; intervals in interval files are integer milliseconds
(the common chest-strap export form); peak times are real seconds.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import FormatError
from .extract import RgbTrace
from .signals import UniformSignal, resample_uniform

TRACE_HEADER = ["t_ms", "r", "g", "b"]
PULSE_HEADER = ["t_ms", "value"]
READINGS_HEADER = ["t_end_s", "hr_bpm", "sdnn_ms", "stress_si", "n_ibis", "status"]


def _read_rows(path, expected_header):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != expected_header:
                raise FormatError(f"{path}: expected header {','.join(expected_header)}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(expected_header):
                    raise FormatError(f"{path}:{lineno}: expected {len(expected_header)} fields")
                try:
                    rows.append([float(x) for x in row])
                except ValueError as exc:
                    raise FormatError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return np.array(rows, dtype=np.float64).reshape(-1, len(expected_header))


def infer_rate(t_s: np.ndarray) -> float:
    """Nominal rate from the median frame spacing, rounded to 1 mHz."""
    if t_s.size < 2:
        raise FormatError("cannot infer a rate from fewer than 2 samples")
    dt = float(np.median(np.diff(t_s)))
    if dt <= 0:
        raise FormatError("timestamps are not increasing")
    return round(1.0 / dt, 3)


def read_trace_csv(path, nominal_rate: float | None = None) -> RgbTrace:
    """Load a per-frame RGB trace (header ``t_ms,r,g,b``)."""
    data = _read_rows(path, TRACE_HEADER)
    if data.shape[0] < 2:
        raise FormatError(f"{path}: a trace needs at least 2 frames")
    t = data[:, 0] / 1000.0
    rate = nominal_rate if nominal_rate is not None else infer_rate(t)
    return RgbTrace(t=t, r=data[:, 1], g=data[:, 2], b=data[:, 3], nominal_rate=rate)


def write_trace_csv(path, trace: RgbTrace):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for t, r, g, b in zip(trace.t, trace.r, trace.g, trace.b):
            fh.write(f"{t * 1000.0:.6f},{r:.9g},{g:.9g},{b:.9g}\n")


def read_pulse_csv(path) -> UniformSignal:
    """Load a pulse wave (header ``t_ms,value``) onto a uniform grid."""
    data = _read_rows(path, PULSE_HEADER)
    if data.shape[0] < 2:
        raise FormatError(f"{path}: a pulse wave needs at least 2 samples")
    t = data[:, 0] / 1000.0
    return resample_uniform(t, data[:, 1], infer_rate(t))


def write_pulse_csv(path, sig: UniformSignal):
    times = sig.times()
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(PULSE_HEADER) + "\n")
        for t, v in zip(times, sig.samples):
            fh.write(f"{t * 1000.0:.6f},{v:.9g}\n")


def read_ibi_file(path) -> np.ndarray:
    """Intervals in seconds from a one-interval-per-line milliseconds file."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        ms = np.array([float(x) for x in lines], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric interval: {exc}") from exc
    if ms.size == 0:
        raise FormatError(f"{path}: no intervals")
    return ms / 1000.0


def write_ibi_file(path, ibis_s: np.ndarray):
    ms = np.round(np.asarray(ibis_s) * 1000.0).astype(np.int64)
    Path(path).write_text("\n".join(str(x) for x in ms) + "\n", encoding="utf-8")


def read_peaks_file(path) -> np.ndarray:
    """Peak times in seconds, one per line."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        times = np.array([float(x) for x in lines], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric peak time: {exc}") from exc
    if times.size and np.any(np.diff(times) <= 0):
        raise FormatError(f"{path}: peak times must be strictly increasing")
    return times


def write_peaks_file(path, times_s: np.ndarray):
    Path(path).write_text(
        "\n".join(f"{t:.6f}" for t in np.asarray(times_s)) + "\n", encoding="utf-8"
    )


def read_ubfc_ground_truth(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parse the three-row ground-truth text: pulse, heart rate, timestamps.

    Rows are whitespace-separated; all three must be equally long.
    """
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(lines) != 3:
        raise FormatError(f"{path}: expected 3 rows (pulse, hr, timestamps), got {len(lines)}")
    try:
        rows = [np.array([float(x) for x in ln.split()]) for ln in lines]
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric value: {exc}") from exc
    if not (rows[0].size == rows[1].size == rows[2].size):
        raise FormatError(f"{path}: rows differ in length")
    if rows[0].size < 2:
        raise FormatError(f"{path}: ground truth needs at least 2 samples")
    return rows[0], rows[1], rows[2]


def ubfc_pulse_signal(path) -> UniformSignal:
    """Ground-truth pulse wave from a three-row file, resampled uniform."""
    pulse, _hr, t = read_ubfc_ground_truth(path)
    return resample_uniform(t, pulse, infer_rate(t))


def _fmt(value, digits=6) -> str:
    if value is None:
        return ""
    return f"{value:.{digits}f}"


def write_readings_csv(path, readings):
    """Write windowed readings (one row per emission)."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(READINGS_HEADER) + "\n")
        for r in readings:
            fh.write(
                f"{r.t_end:.3f},{_fmt(r.hr_bpm, 3)},{_fmt(r.sdnn_ms, 3)},"
                f"{_fmt(r.stress_si, 4)},{r.n_ibis},{r.status}\n"
            )


def read_readings_csv(path) -> list[dict]:
    """Rows of a readings CSV as dicts with floats where defined."""
    path = Path(path)
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != READINGS_HEADER:
            raise FormatError(f"{path}: expected header {','.join(READINGS_HEADER)}")
        for row in reader:
            parsed = {}
            for key, value in row.items():
                if key in ("status",):
                    parsed[key] = value
                elif key == "n_ibis":
                    parsed[key] = int(value)
                else:
                    parsed[key] = float(value) if value != "" else None
            out.append(parsed)
    return out
