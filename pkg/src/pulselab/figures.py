"""Figure rendering for the report paths (file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import BIOMETRIC_FIELDS, EvalReport

_LABELS = {
    "hr_bpm": ("Heart rate", "bpm"),
    "sdnn_ms": ("Heart rate variability (SDNN)", "ms"),
    "stress_si": ("Stress index", ""),
}


def save_readings_timeline(readings, path, window_s: float = 60.0) -> Path:
    """Three stacked panels of heart rate, SDNN and stress over time.

    The span before a full window of history exists is shaded.
    """
    path = Path(path)
    t = np.array([r.t_end for r in readings])
    fig, axes = plt.subplots(3, 1, figsize=(10, 7), sharex=True)
    for ax, fieldname in zip(axes, BIOMETRIC_FIELDS):
        title, unit = _LABELS[fieldname]
        vals = np.array(
            [getattr(r, fieldname) if getattr(r, fieldname) is not None else np.nan
             for r in readings]
        )
        ax.plot(t, vals, lw=1.2, color="tab:red")
        ax.set_ylabel(unit or "index")
        ax.set_title(title, fontsize=10)
        ax.grid(True, alpha=0.3)
        if t.size and t[0] < window_s:
            ax.axvspan(t[0], min(window_s, t[-1]), color="grey", alpha=0.15,
                       label="partial window")
    axes[-1].set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_eval_scatters(report: EvalReport, out_stem) -> list[Path]:
    """One predicted-vs-target scatter per biometric with data."""
    out_stem = Path(out_stem)
    written = []
    for fieldname in BIOMETRIC_FIELDS:
        pred, target = report.pairs(fieldname)
        if pred.size == 0:
            continue
        title, unit = _LABELS[fieldname]
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.scatter(target, pred, s=22, alpha=0.8, color="tab:red")
        lo = min(target.min(), pred.min())
        hi = max(target.max(), pred.max())
        pad = 0.05 * (hi - lo or 1.0)
        ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], "k--", lw=1, alpha=0.6)
        ax.set_xlim(lo - pad, hi + pad)
        ax.set_ylim(lo - pad, hi + pad)
        ax.set_xlabel(f"target {unit}".strip())
        ax.set_ylabel(f"predicted {unit}".strip())
        ax.set_title(title, fontsize=10)
        ms = report.metrics.get(fieldname)
        if ms is not None:
            rho = f"{ms.pearson:.3f}" if ms.pearson is not None else "-"
            ax.text(
                0.04, 0.93,
                f"MAE {ms.mae:.3f}\nRMSE {ms.rmse:.3f}\nr {rho}",
                transform=ax.transAxes, fontsize=8, va="top",
                bbox=dict(boxstyle="round", fc="white", alpha=0.7),
            )
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out = out_stem.with_name(f"{out_stem.name}_{fieldname.split('_')[0]}_scatter.png")
        fig.savefig(out, dpi=150)
        plt.close(fig)
        written.append(out)
    return written
