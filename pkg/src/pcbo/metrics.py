"""Regret metrics and the summaries used by the benchmark reports."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

LOG_REGRET_FLOOR = 1e-12
KDE_MIN_BANDWIDTH = 1e-3


def normalized_regret(best_value: float, f_star: float) -> float:
    """1 - best/f_star, clamped to [0, 1]; requires a positive optimum."""
    if not (f_star > 0.0):
        raise InputError("f_star must be positive")
    return float(min(max(1.0 - best_value / f_star, 0.0), 1.0))


def log_normalized_regret(best_value: float, f_star: float) -> float:
    """log10 of the normalized regret, floored at 1e-12 (so never below -12)."""
    regret = normalized_regret(best_value, f_star)
    return math.log10(max(regret, LOG_REGRET_FLOOR))


@dataclass(frozen=True)
class RegretSeries:
    """Per-iteration best value and (log) normalized regret."""

    best_values: np.ndarray
    norm_regret: np.ndarray
    log10_norm_regret: np.ndarray

    def __len__(self) -> int:
        return self.best_values.shape[0]


def best_so_far_series(batch_values: Sequence[np.ndarray], f_star: float) -> RegretSeries:
    """Running best over batches and the regrets it implies."""
    if not batch_values:
        raise InputError("at least one batch is required")
    best_values = []
    running = -math.inf
    for values in batch_values:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise InputError("batches must be non-empty")
        running = max(running, float(np.max(values)))
        best_values.append(running)
    best = np.array(best_values)
    norm = np.array([normalized_regret(v, f_star) for v in best])
    log10 = np.array([log_normalized_regret(v, f_star) for v in best])
    return RegretSeries(best, norm, log10)


def cumulative_regret(all_values: Sequence[float] | np.ndarray, f_star: float) -> np.ndarray:
    """Running sum of per-proposal instantaneous regret f_star - f(x)."""
    values = np.asarray(all_values, dtype=float).ravel()
    if values.size == 0:
        raise InputError("at least one value is required")
    return np.cumsum(f_star - values)


def median_series(series: Sequence[np.ndarray]) -> np.ndarray:
    """Element-wise median across equally long series; even counts average
    the two central values."""
    if not series:
        raise InputError("at least one series is required")
    arrays = [np.asarray(s, dtype=float).ravel() for s in series]
    if len({a.shape[0] for a in arrays}) != 1:
        raise InputError("series must have equal length")
    return np.median(np.array(arrays), axis=0)


def kde(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian kernel density estimate with bandwidth n^(-1/5) * std,
    floored at 1e-3."""
    samples = np.asarray(samples, dtype=float).ravel()
    grid = np.asarray(grid, dtype=float).ravel()
    if samples.size == 0:
        raise InputError("at least one sample is required")
    n = samples.size
    bandwidth = max(n ** (-0.2) * float(np.std(samples)), KDE_MIN_BANDWIDTH)
    z = (grid[:, None] - samples[None, :]) / bandwidth
    weights = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return weights.sum(axis=1) / (n * bandwidth)
