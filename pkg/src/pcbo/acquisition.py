"""Acquisition scores over GP posteriors: GP-UCB, fixed-beta UCB, and EI."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .gp import GpPosterior, predict

ACQUISITION_KINDS = ("gp_ucb", "ucb", "ei")


@dataclass(frozen=True)
class AcquisitionSpec:
    """Which score to use and its parameter (delta, beta, or xi)."""

    kind: str
    delta: float = 0.1
    beta: float = 2.0
    xi: float = 0.01

    def __post_init__(self) -> None:
        if self.kind not in ACQUISITION_KINDS:
            raise InputError(f"unknown acquisition kind {self.kind!r}")
        if self.kind == "gp_ucb" and not (0.0 < self.delta < 1.0):
            raise InputError("delta must lie in (0, 1)")
        if self.kind == "ucb" and not (self.beta > 0.0):
            raise InputError("beta must be positive")
        if self.kind == "ei" and self.xi < 0.0:
            raise InputError("xi must be non-negative")


def beta_t(t: int, d: int, delta: float) -> float:
    """Iteration-dependent confidence width 2 log(pi^2 / (3 delta) * t^(2 + d/2))."""
    if not (0.0 < delta < 1.0):
        raise InputError("delta must lie in (0, 1)")
    if t < 1 or d < 1:
        raise InputError("t and d must be >= 1")
    return 2.0 * math.log(math.pi ** 2 / (3.0 * delta) * t ** (2.0 + d / 2.0))


def alpha_ucb(mean: float, stddev: float, beta: float) -> float:
    """mean + sqrt(beta) * stddev."""
    return mean + math.sqrt(beta) * stddev


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def alpha_ei(mean: float, stddev: float, f_best: float, xi: float) -> float:
    """Expected improvement over f_best + xi; max(delta, 0) in the sigma=0 limit."""
    delta = mean - f_best - xi
    if stddev <= 0.0:
        return max(delta, 0.0)
    z = delta / stddev
    value = delta * _norm_cdf(z) + stddev * _norm_pdf(z)
    return max(value, 0.0)


def score(
    model: GpPosterior,
    spec: AcquisitionSpec,
    x: np.ndarray,
    t: int = 1,
    f_best: float = 0.0,
) -> float:
    """Evaluate the configured acquisition at a point."""
    mean, var = predict(model, x)
    stddev = math.sqrt(var)
    if spec.kind == "ucb":
        return alpha_ucb(mean, stddev, spec.beta)
    if spec.kind == "gp_ucb":
        return alpha_ucb(mean, stddev, beta_t(t, model.dimension, spec.delta))
    return alpha_ei(mean, stddev, f_best, spec.xi)
