"""Benchmark objective functions.

Three families: analytic test functions in maximization form, randomly
generated two-dimensional Gaussian-mixture densities, and a GP surrogate fit
from a tabular yield dataset.  Every objective is non-negative on its bounds
with a positive optimum so normalized regret is well defined.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .boxopt import Bounds, unit_grid
from .errors import GenerationError, IngestError, InputError
from .gp import Dataset, KernelSpec, fit, optimize_hyperparams, predict_many

GMM_BOUNDS = Bounds(np.array([-3.0, -3.0]), np.array([3.0, 3.0]))
GMM_MEAN_SPACING = 2.0
GMM_COV_RANGE = {1: (0.7, 1.3), 2: (0.7, 1.3), 3: (0.7, 1.3), 4: (1.5, 2.0)}
GMM_REJECTION_LIMIT = 1000

# Realistic design space: reactant flow (ml/min) and block temperature (degC).
REALISTIC_BOUNDS = Bounds(np.array([5.0, 520.0]), np.array([50.0, 590.0]))


@dataclass(frozen=True)
class Objective:
    """A named score function over a box, with its known or cached optimum."""

    name: str
    dimension: int
    bounds: Bounds
    fn: Callable[[np.ndarray], float]
    f_star: float
    x_star: np.ndarray | None = None
    f_star_refined: float | None = None

    def eval(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.dimension:
            raise InputError(f"{self.name} expects dimension {self.dimension}")
        return float(self.fn(x))

    def __call__(self, x: np.ndarray) -> float:
        return self.eval(x)


def true_optimum(objective: Objective) -> tuple[np.ndarray | None, float]:
    """Optimal point (when known) and optimal value of a registered objective."""
    return objective.x_star, objective.f_star


# ---------------------------------------------------------------------------
# Gaussian mixtures


@dataclass(frozen=True)
class GmmObjective:
    weights: np.ndarray
    means: np.ndarray  # (K, 2)
    covariances: np.ndarray  # (K, 2, 2)

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float)
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covariances, dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise InputError("weights must be non-negative and sum to 1")
        for cov in covs:
            if not np.allclose(cov, cov.T) or np.any(np.linalg.eigvalsh(cov) <= 0):
                raise InputError("covariances must be symmetric positive-definite")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)


def gmm_generate(case: int, rng: np.random.Generator) -> GmmObjective:
    """Random mixture with ``case`` components and case-specific covariances."""
    if case not in (1, 2, 3, 4):
        raise InputError("case must be in 1..4")
    lo, hi = GMM_COV_RANGE[case]
    k = case
    for _ in range(GMM_REJECTION_LIMIT):
        means = rng.uniform(-3.0, 3.0, size=(k, 2))
        if case in (2, 3):
            dists = [
                np.linalg.norm(means[i] - means[j])
                for i in range(k)
                for j in range(i + 1, k)
            ]
            if dists and min(dists) < GMM_MEAN_SPACING:
                continue
        diagonals = rng.uniform(lo, hi, size=(k, 2))
        covs = np.array([np.diag(diag) for diag in diagonals])
        return GmmObjective(np.full(k, 1.0 / k), means, covs)
    raise GenerationError(
        f"could not place {k} means with spacing >= {GMM_MEAN_SPACING} "
        f"in {GMM_REJECTION_LIMIT} attempts"
    )


def gmm_eval(model: GmmObjective, x: np.ndarray) -> float:
    """Mixture density at a 2-D point."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != 2:
        raise InputError("gmm_eval expects a 2-D point")
    total = 0.0
    for weight, mean, cov in zip(model.weights, model.means, model.covariances):
        diff = x - mean
        det = float(np.linalg.det(cov))
        quad = float(diff @ np.linalg.solve(cov, diff))
        total += weight * math.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    return total


def _gmm_eval_many(model: GmmObjective, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    total = np.zeros(points.shape[0])
    for weight, mean, cov in zip(model.weights, model.means, model.covariances):
        diff = points - mean
        inv = np.linalg.inv(cov)
        det = float(np.linalg.det(cov))
        quad = np.einsum("ij,jk,ik->i", diff, inv, diff)
        total += weight * np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    return total


def _refine_maximum(
    fn: Callable[[np.ndarray], float],
    bounds: Bounds,
    per_dim: int = 201,
    starts: int = 5,
) -> tuple[np.ndarray, float]:
    """Dense grid scan followed by local (clipped Nelder-Mead) refinement."""
    grid = unit_grid(bounds, per_dim)
    values = np.array([fn(p) for p in grid])
    order = np.argsort(values)[::-1][:starts]
    best_x, best_f = grid[order[0]].copy(), float(values[order[0]])

    def neg(x: np.ndarray) -> float:
        clipped = np.clip(x, bounds.lower, bounds.upper)
        return -fn(clipped)

    for idx in order:
        res = minimize(neg, grid[idx], method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 2000})
        x = np.clip(res.x, bounds.lower, bounds.upper)
        value = fn(x)
        if value > best_f:
            best_x, best_f = x, float(value)
    return best_x, best_f


def _refine_maximum_vectorized(
    fn_many: Callable[[np.ndarray], np.ndarray],
    bounds: Bounds,
    per_dim: int = 201,
    starts: int = 5,
) -> tuple[np.ndarray, float]:
    grid = unit_grid(bounds, per_dim)
    values = fn_many(grid)
    order = np.argsort(values)[::-1][:starts]
    best_x, best_f = grid[order[0]].copy(), float(values[order[0]])

    def neg(x: np.ndarray) -> float:
        clipped = np.clip(x, bounds.lower, bounds.upper)
        return -float(fn_many(clipped.reshape(1, -1))[0])

    for idx in order:
        res = minimize(neg, grid[idx], method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 2000})
        x = np.clip(res.x, bounds.lower, bounds.upper)
        value = float(fn_many(x.reshape(1, -1))[0])
        if value > best_f:
            best_x, best_f = x, float(value)
    return best_x, best_f


def gmm_objective(case: int, rng: np.random.Generator | int) -> Objective:
    """Wrap a generated mixture as a benchmark objective with a cached optimum."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    model = gmm_generate(case, rng)
    x_star, f_star = _refine_maximum_vectorized(
        lambda pts: _gmm_eval_many(model, pts), GMM_BOUNDS
    )
    return Objective(
        name=f"gmm_case{case}",
        dimension=2,
        bounds=GMM_BOUNDS,
        fn=lambda x, model=model: gmm_eval(model, x),
        f_star=f_star,
        x_star=x_star,
        f_star_refined=f_star,
    )


# ---------------------------------------------------------------------------
# Analytic appendix functions (maximization form)

_BOUNDS_TOL = 1e-9

_HARTMANN_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMANN_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)


def _levy6(x: np.ndarray) -> float:
    w = 1.0 + (x - 1.0) / 4.0
    total = math.sin(math.pi * w[0]) ** 2
    for i in range(5):
        total += (w[i] - 1.0) ** 2 * (1.0 + 10.0 * math.sin(math.pi * w[i] + 1.0) ** 2)
    total += (w[5] - 1.0) ** 2 * (1.0 + math.sin(2.0 * math.pi * w[5]) ** 2)
    return 47.341 - total


def _hartmann6(x: np.ndarray) -> float:
    inner = np.sum(_HARTMANN_A * (x - _HARTMANN_P) ** 2, axis=1)
    return float(np.sum(_HARTMANN_ALPHA * np.exp(-inner)))


def _rosenbrock3(x: np.ndarray) -> float:
    penalty = (
        (1.0 - x[0]) ** 2
        + 100.0 * (x[1] - x[0] ** 2) ** 2
        + (1.0 - x[1]) ** 2
        + 100.0 * (x[2] - x[1] ** 2) ** 2
    )
    return 7218.0 - penalty


def _rosenbrock4(x: np.ndarray) -> float:
    penalty = sum(
        100.0 * (x[i + 1] - x[i] ** 2) ** 2 + (1.0 - x[i]) ** 2 for i in range(3)
    )
    return 10827.0 - penalty


_SYNTHETIC: dict[str, dict] = {
    "levy6": {
        "fn": _levy6,
        "bounds": Bounds(np.full(6, -5.0), np.full(6, 5.0)),
        "x_star": np.ones(6),
        "f_star": 47.341,
    },
    "hartmann6": {
        "fn": _hartmann6,
        "bounds": Bounds(np.zeros(6), np.ones(6)),
        "x_star": None,  # filled by numeric refinement on first use
        "f_star": None,
    },
    "rosenbrock3": {
        "fn": _rosenbrock3,
        "bounds": Bounds(np.full(3, -2.0), np.full(3, 2.0)),
        "x_star": np.ones(3),
        "f_star": 7218.0,
    },
    "rosenbrock4": {
        "fn": _rosenbrock4,
        "bounds": Bounds(np.full(4, -2.0), np.full(4, 2.0)),
        "x_star": np.ones(4),
        "f_star": 10827.0,
    },
}

_hartmann_cache: dict[str, tuple[np.ndarray, float]] = {}


def _hartmann_optimum() -> tuple[np.ndarray, float]:
    if "opt" not in _hartmann_cache:
        # 201^6 is infeasible; use a coarse grid plus multistart refinement.
        bounds = _SYNTHETIC["hartmann6"]["bounds"]
        x, f = _refine_maximum(_hartmann6, bounds, per_dim=5, starts=20)
        _hartmann_cache["opt"] = (x, f)
    return _hartmann_cache["opt"]


def eval_synthetic(name: str, x: np.ndarray) -> float:
    """Evaluate one of the analytic benchmark functions, checking bounds."""
    if name not in _SYNTHETIC:
        raise InputError(f"unknown synthetic function {name!r}")
    entry = _SYNTHETIC[name]
    bounds: Bounds = entry["bounds"]
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != bounds.dimension:
        raise InputError(f"{name} expects dimension {bounds.dimension}")
    if np.any(x < bounds.lower - _BOUNDS_TOL) or np.any(x > bounds.upper + _BOUNDS_TOL):
        raise InputError(f"{name}: point {x.tolist()} outside bounds")
    return float(entry["fn"](x))


def synthetic_objective(name: str) -> Objective:
    if name not in _SYNTHETIC:
        raise InputError(f"unknown synthetic function {name!r}")
    entry = _SYNTHETIC[name]
    if name == "hartmann6":
        x_star, f_star = _hartmann_optimum()
    else:
        x_star, f_star = entry["x_star"], entry["f_star"]
    return Objective(
        name=name,
        dimension=entry["bounds"].dimension,
        bounds=entry["bounds"],
        fn=lambda x, name=name: eval_synthetic(name, x),
        f_star=f_star,
        x_star=x_star,
    )


# ---------------------------------------------------------------------------
# GP surrogate from tabular yield data


def read_yield_table(path: str | Path) -> list[tuple[np.ndarray, float]]:
    """Parse a CSV with columns flow_ml_min, temp_c, yield_pct (mass_mg optional).

    When a mass column is present, rows are filtered to 150 mg.
    """
    path = Path(path)
    records: list[tuple[np.ndarray, float]] = []
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"flow_ml_min", "temp_c", "yield_pct"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise IngestError(f"missing required columns {sorted(required)}")
        has_mass = "mass_mg" in reader.fieldnames
        for row_number, row in enumerate(reader, start=2):
            try:
                flow = float(row["flow_ml_min"])
                temp = float(row["temp_c"])
                yld = float(row["yield_pct"])
                mass = float(row["mass_mg"]) if has_mass else None
            except (TypeError, ValueError) as exc:
                raise IngestError(f"row {row_number}: {exc}") from exc
            if has_mass and mass != 150.0:
                continue
            records.append((np.array([flow, temp]), yld))
    return records


def fit_surrogate_from_table(
    records: Sequence[tuple[Iterable[float], float]],
    bounds: Bounds | None = None,
) -> Objective:
    """Fit an RBF GP to (inputs, yield) records; the posterior mean is the
    objective.  Inputs are rescaled to the unit cube before fitting."""
    records = list(records)
    if len(records) < 5:
        raise InputError("at least 5 records are required")
    inputs = np.array([np.asarray(r[0], dtype=float).ravel() for r in records])
    outputs = np.array([float(r[1]) for r in records])
    dimension = inputs.shape[1]
    if bounds is None:
        if dimension != 2:
            raise InputError("default bounds apply to 2-D (flow, temperature) data")
        bounds = REALISTIC_BOUNDS
    span = bounds.upper - bounds.lower
    unit_inputs = (inputs - bounds.lower) / span
    # center outputs so the zero-mean GP models residuals around the average
    offset = float(np.mean(outputs))
    data = Dataset(unit_inputs, outputs - offset)
    default = KernelSpec(kind="rbf",
                         output_scale=max(float(np.var(outputs)), 1e-6),
                         length_scale=0.3)
    spec = optimize_hyperparams(data, default, rng=np.random.default_rng(0))
    model = fit(data, spec)

    def fn_many(points: np.ndarray) -> np.ndarray:
        unit = (np.atleast_2d(points) - bounds.lower) / span
        mean, _ = predict_many(model, unit)
        return mean + offset

    x_star, f_star = _refine_maximum_vectorized(fn_many, bounds)
    return Objective(
        name="surrogate",
        dimension=dimension,
        bounds=bounds,
        fn=lambda x: float(fn_many(np.asarray(x, dtype=float).reshape(1, -1))[0]),
        f_star=f_star,
        x_star=x_star,
        f_star_refined=f_star,
    )


# ---------------------------------------------------------------------------
# Registry used by the benchmark harness


def make_objective(spec: dict) -> Objective:
    """Build an objective from a config entry, e.g. {"name": "gmm", "case": 1}."""
    if "name" not in spec:
        raise InputError("objective entry requires a 'name'")
    name = spec["name"]
    if name == "gmm" or name.startswith("gmm_case"):
        case = int(spec.get("case", name[-1] if name.startswith("gmm_case") else 1))
        seed = int(spec.get("seed", 0))
        return gmm_objective(case, seed)
    if name in _SYNTHETIC:
        return synthetic_objective(name)
    if name == "surrogate":
        if "path" in spec:
            records = read_yield_table(spec["path"])
        elif "records" in spec:
            records = [(np.asarray(r[0], dtype=float), float(r[1])) for r in spec["records"]]
        else:
            raise InputError("surrogate objective requires 'path' or 'records'")
        return fit_surrogate_from_table(records)
    raise InputError(f"unknown objective {name!r}")
