"""Benchmark error metrics: MAE, MAPE, RMSE and Pearson correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch, TooFewPoints, ZeroTarget


def _pair(pred, target) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.size != target.size:
        raise LengthMismatch(f"{pred.size} predictions vs {target.size} targets")
    return pred, target


def mae(pred, target) -> float:
    """Mean absolute error."""
    pred, target = _pair(pred, target)
    if pred.size == 0:
        raise EmptyInput("MAE of empty sequences")
    return float(np.mean(np.abs(pred - target)))


def mape(pred, target) -> float:
    """Mean absolute error as a percentage of the target value."""
    pred, target = _pair(pred, target)
    if pred.size == 0:
        raise EmptyInput("MAPE of empty sequences")
    if np.any(target == 0):
        raise ZeroTarget("MAPE undefined for zero targets")
    return float(np.mean(np.abs(pred - target) / target)) * 100.0


def rmse(pred, target) -> float:
    """Root mean squared error."""
    pred, target = _pair(pred, target)
    if pred.size == 0:
        raise EmptyInput("RMSE of empty sequences")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def pearson(pred, target) -> float | None:
    """Sample Pearson correlation; None when either side is constant."""
    pred, target = _pair(pred, target)
    if pred.size < 2:
        raise TooFewPoints(f"correlation needs >= 2 points, got {pred.size}")
    dp = pred - pred.mean()
    dt = target - target.mean()
    denom = np.sqrt(np.sum(dp**2) * np.sum(dt**2))
    if denom == 0.0:
        return None
    return float(np.sum(dp * dt) / denom)


@dataclass(frozen=True)
class MetricSet:
    """The four benchmark metrics for one predicted/target series."""

    mae: float
    mape_pct: float | None
    rmse: float
    pearson: float | None
    n: int


def metric_set(pred, target) -> MetricSet:
    """All four metrics at once.

    MAPE is None when a target is zero; Pearson is None for fewer than
    two points or a constant series.
    """
    pred, target = _pair(pred, target)
    try:
        mape_val = mape(pred, target)
    except ZeroTarget:
        mape_val = None
    pearson_val = pearson(pred, target) if pred.size >= 2 else None
    return MetricSet(
        mae=mae(pred, target),
        mape_pct=mape_val,
        rmse=rmse(pred, target),
        pearson=pearson_val,
        n=int(pred.size),
    )
