"""Gaussian-process regression with Matern-2.5 and RBF kernels.

Models use a zero prior mean and condition on noisy observations through a
Cholesky factorization of ``C = K + noise * I``.  All fitting here assumes
inputs have already been rescaled to the unit cube by the caller, so a single
isotropic length scale is meaningful across heterogeneous physical units.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError, InputError, NumericalError

logger = logging.getLogger(__name__)

_SQRT5 = math.sqrt(5.0)

# Relative diagonal jitter levels tried in order when a factorization fails.
JITTER_LEVELS = (0.0, 1e-10, 1e-8, 1e-6, 1e-4)

KERNEL_KINDS = ("matern25", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters (output scale, length scale, noise)."""

    kind: str = "matern25"
    output_scale: float = 1.0
    length_scale: float = 0.2
    noise_variance: float = 1e-6

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise InputError(f"unknown kernel kind {self.kind!r}")
        if not (self.output_scale > 0.0):
            raise InputError("output_scale must be positive")
        if not (self.length_scale > 0.0):
            raise InputError("length_scale must be positive")
        if self.noise_variance < 0.0:
            raise InputError("noise_variance must be non-negative")


@dataclass(frozen=True)
class Dataset:
    """Observed inputs (n x d) and outputs (n,)."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self) -> None:
        inputs = np.asarray(self.inputs, dtype=float)
        outputs = np.asarray(self.outputs, dtype=float)
        if inputs.ndim != 2:
            inputs = inputs.reshape(len(outputs), -1)
        if inputs.shape[0] != outputs.shape[0]:
            raise InputError("inputs and outputs must have equal length")
        if inputs.size and not np.all(np.isfinite(inputs)):
            raise InputError("inputs contain non-finite entries")
        if outputs.size and not np.all(np.isfinite(outputs)):
            raise InputError("outputs contain non-finite entries")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    @classmethod
    def empty(cls, dimension: int) -> "Dataset":
        return cls(np.empty((0, dimension)), np.empty(0))

    @property
    def n(self) -> int:
        return self.outputs.shape[0]

    @property
    def dimension(self) -> int:
        return self.inputs.shape[1]


def _profile(kind: str, u: np.ndarray) -> np.ndarray:
    """Stationary correlation profile as a function of u = r / length_scale."""
    if kind == "matern25":
        s = _SQRT5 * u
        return (1.0 + s + 5.0 * u * u / 3.0) * np.exp(-s)
    return np.exp(-0.5 * u * u)


def kernel_eval(spec: KernelSpec, x: np.ndarray, x2: np.ndarray) -> float:
    """Covariance between two points."""
    x = np.asarray(x, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x.shape != x2.shape:
        raise DimensionMismatchError(
            f"points of dimension {x.shape[0]} and {x2.shape[0]}"
        )
    u = np.linalg.norm(x - x2) / spec.length_scale
    return float(spec.output_scale * _profile(spec.kind, np.asarray(u)))


def gram(spec: KernelSpec, xa: np.ndarray, xb: np.ndarray | None = None) -> np.ndarray:
    """Cross-covariance matrix between two point sets."""
    xa = np.atleast_2d(np.asarray(xa, dtype=float))
    xb = xa if xb is None else np.atleast_2d(np.asarray(xb, dtype=float))
    if xa.shape[1] != xb.shape[1]:
        raise DimensionMismatchError("point sets of different dimension")
    if xa.shape[0] == 0 or xb.shape[0] == 0:
        return np.empty((xa.shape[0], xb.shape[0]))
    u = cdist(xa, xb) / spec.length_scale
    return spec.output_scale * _profile(spec.kind, u)


def _cholesky_with_jitter(matrix: np.ndarray, scale: float) -> tuple[np.ndarray, float]:
    """Factor a symmetric matrix, escalating diagonal jitter relative to scale."""
    eye = np.eye(matrix.shape[0])
    for level in JITTER_LEVELS:
        try:
            return np.linalg.cholesky(matrix + level * scale * eye), level
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        f"factorization failed after jitter levels {JITTER_LEVELS} (relative to {scale})"
    )


@dataclass(frozen=True)
class GpPosterior:
    """Fitted GP: kernel, data, Cholesky factor of C and weights C^-1 y."""

    kernel: KernelSpec
    data: Dataset
    factor: np.ndarray | None
    weights: np.ndarray | None
    jitter: float = 0.0

    @property
    def dimension(self) -> int:
        return self.data.dimension


def fit(data: Dataset, spec: KernelSpec) -> GpPosterior:
    """Condition a zero-mean GP on a dataset.

    An empty dataset yields the prior (zero mean, variance ``output_scale``).
    """
    if data.n == 0:
        return GpPosterior(spec, data, None, None)
    cov = gram(spec, data.inputs)
    cov[np.diag_indices_from(cov)] += spec.noise_variance
    factor, jitter = _cholesky_with_jitter(cov, spec.output_scale)
    half = solve_triangular(factor, data.outputs, lower=True)
    weights = solve_triangular(factor.T, half, lower=False)
    return GpPosterior(spec, data, factor, weights, jitter)


def predict_many(model: GpPosterior, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at each row of ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if model.data.inputs.shape[1] and points.shape[1] != model.dimension:
        raise DimensionMismatchError(
            f"query dimension {points.shape[1]} != model dimension {model.dimension}"
        )
    prior_var = model.kernel.output_scale
    if model.data.n == 0:
        m = points.shape[0]
        return np.zeros(m), np.full(m, prior_var)
    kvec = gram(model.kernel, points, model.data.inputs)  # (m, n)
    mean = kvec @ model.weights
    half = solve_triangular(model.factor, kvec.T, lower=True)  # (n, m)
    var = prior_var - np.einsum("ij,ij->j", half, half)
    return mean, np.maximum(var, 0.0)


def predict(model: GpPosterior, x: np.ndarray) -> tuple[float, float]:
    """Posterior mean and (clamped, non-negative) variance at a single point."""
    mean, var = predict_many(model, np.asarray(x, dtype=float).reshape(1, -1))
    return float(mean[0]), float(var[0])


def log_marginal_likelihood(model: GpPosterior) -> float:
    """Zero-mean Gaussian log marginal likelihood of the model's data."""
    n = model.data.n
    if n == 0:
        return 0.0
    quad = float(model.data.outputs @ model.weights)
    logdet = 2.0 * float(np.sum(np.log(np.diag(model.factor))))
    return -0.5 * quad - 0.5 * logdet - 0.5 * n * math.log(2.0 * math.pi)


def grid_posterior(model: GpPosterior, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Joint posterior over a grid: mean vector and Cholesky factor of the
    (jittered) posterior covariance."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise InputError("grid must be non-empty")
    if model.data.inputs.shape[1] and grid.shape[1] != model.dimension:
        raise DimensionMismatchError("grid dimension does not match model")
    prior = gram(model.kernel, grid)
    if model.data.n == 0:
        mean = np.zeros(grid.shape[0])
        cov = prior
    else:
        kvec = gram(model.kernel, grid, model.data.inputs)
        mean = kvec @ model.weights
        half = solve_triangular(model.factor, kvec.T, lower=True)
        cov = prior - half.T @ half
        cov = 0.5 * (cov + cov.T)
    factor, _ = _cholesky_with_jitter(cov, model.kernel.output_scale)
    return mean, factor


def sample_on_grid(model: GpPosterior, grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One joint draw from the posterior over the grid (mean + L z)."""
    mean, factor = grid_posterior(model, grid)
    z = rng.standard_normal(mean.shape[0])
    return mean + factor @ z


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-3):
    """Golden-section maximization of a 1-D function on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def default_hyperparam_bounds(data: Dataset) -> dict[str, tuple[float, float]]:
    """Search intervals for the length scale and output scale."""
    var_y = max(float(np.var(data.outputs)), 1e-12) if data.n else 1.0
    return {
        "length_scale": (1e-2, 1e1),
        "output_scale": (1e-3 * var_y, 1e3 * var_y),
        "noise_variance": (1e-8 * var_y, 1e-1 * var_y),
    }


def optimize_hyperparams(
    data: Dataset,
    default: KernelSpec,
    bounds: dict[str, tuple[float, float]] | None = None,
    restarts: int = 5,
    rng: np.random.Generator | None = None,
    learn_noise: bool = False,
) -> KernelSpec:
    """Multistart maximization of the marginal likelihood over (log l, log s).

    Noise variance stays fixed at ``1e-6 * var(y)`` unless ``learn_noise``.
    Local refinement uses coordinate-wise golden-section passes.  Datasets
    with fewer than two points return ``default`` unchanged; if every restart
    fails numerically, ``default`` is returned and a warning is logged.
    """
    if data.n < 2:
        return default
    if rng is None:
        rng = np.random.default_rng(0)
    if bounds is None:
        bounds = default_hyperparam_bounds(data)
    var_y = max(float(np.var(data.outputs)), 1e-12)
    fixed_noise = 1e-6 * var_y

    names = ["length_scale", "output_scale"] + (["noise_variance"] if learn_noise else [])
    log_bounds = [tuple(math.log(v) for v in bounds[name]) for name in names]

    def build(params: list[float]) -> KernelSpec:
        values = dict(zip(names, (math.exp(p) for p in params)))
        return replace(
            default,
            length_scale=values["length_scale"],
            output_scale=values["output_scale"],
            noise_variance=values.get("noise_variance", fixed_noise),
        )

    def score(params: list[float]) -> float:
        try:
            return log_marginal_likelihood(fit(data, build(params)))
        except NumericalError:
            return -math.inf

    def clip(value: float, i: int) -> float:
        lo, hi = log_bounds[i]
        return min(max(value, lo), hi)

    starts = [[clip(math.log(getattr(default, name)), i) for i, name in enumerate(names)]]
    for _ in range(max(restarts - 1, 0)):
        starts.append([lo + rng.uniform() * (hi - lo) for lo, hi in log_bounds])

    best_params: list[float] | None = None
    best_score = -math.inf
    for start in starts:
        params = list(start)
        value = score(params)
        if value > best_score:
            best_score, best_params = value, list(params)
        if not math.isfinite(value):
            continue
        for _ in range(2):  # coordinate passes
            for i in range(len(params)):
                lo, hi = log_bounds[i]
                wlo, whi = clip(params[i] - 1.0, i), clip(params[i] + 1.0, i)
                if whi - wlo < 1e-6:
                    wlo, whi = lo, hi

                def along(p: float, i=i, params=params) -> float:
                    trial = list(params)
                    trial[i] = p
                    return score(trial)

                p_best, v_best = _golden_max(along, wlo, whi, tol=1e-2)
                if v_best > score(params):
                    params[i] = p_best
            value = score(params)
            if value > best_score:
                best_score, best_params = value, list(params)

    if best_params is None or not math.isfinite(best_score):
        logger.warning("hyperparameter search failed for all restarts; keeping default")
        return default
    return build(best_params)
