"""Global maximization over box domains: DIRECT plus grid utilities.

The DIRECT implementation follows the classic dividing-rectangles scheme:
trisection along the longest side, potential-optimality with an epsilon slack
of 1e-4, and lexicographic tie-breaking on (diameter, value, insertion order).
It is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, InputError, NumericalError

DIRECT_EPSILON = 1e-4
GRID_POINT_CAP = 10 ** 6


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned box: lower[i] < upper[i] for every dimension."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float).ravel()
        upper = np.asarray(self.upper, dtype=float).ravel()
        if lower.shape != upper.shape:
            raise InputError("lower and upper must have equal length")
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise InputError("bounds must be finite")
        if not np.all(lower < upper):
            raise InputError("each lower bound must be below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return self.lower + 0.5 * (self.upper - self.lower)

    def contains(self, point: np.ndarray) -> bool:
        point = np.asarray(point, dtype=float).ravel()
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))

    def subbox(self, dims: Sequence[int]) -> "Bounds":
        dims = list(dims)
        return Bounds(self.lower[dims], self.upper[dims])


def unit_grid(bounds: Bounds, per_dim: int, cap: int = GRID_POINT_CAP) -> np.ndarray:
    """Regular grid with endpoints, row-major with the last dimension fastest."""
    if per_dim < 2:
        raise InputError("per_dim must be >= 2")
    d = bounds.dimension
    total = per_dim ** d
    if total > cap:
        raise CapacityError(f"grid of {total} points exceeds cap {cap}")
    axes = [np.linspace(bounds.lower[i], bounds.upper[i], per_dim) for i in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_argmax(values: np.ndarray, points: np.ndarray) -> tuple[int, np.ndarray, float]:
    """Index, point, and value of the maximum; ties go to the lowest index."""
    values = np.asarray(values, dtype=float).ravel()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if values.shape[0] == 0:
        raise InputError("grid_argmax requires a non-empty sequence")
    if values.shape[0] != points.shape[0]:
        raise InputError("values and points must have equal length")
    idx = int(np.argmax(values))
    return idx, points[idx].copy(), float(values[idx])


class _Rect:
    __slots__ = ("center", "levels", "value", "order")

    def __init__(self, center: np.ndarray, levels: np.ndarray, value: float, order: int):
        self.center = center
        self.levels = levels  # per-dimension trisection counts; side = 3^-level
        self.value = value
        self.order = order

    def half_diagonal(self) -> float:
        sides = 3.0 ** (-self.levels.astype(float))
        return 0.5 * float(np.linalg.norm(sides))


def _potentially_optimal(rects: list[_Rect], best: float) -> list[_Rect]:
    """Rects that could contain the maximum for some Lipschitz constant."""
    diameters = np.array([r.half_diagonal() for r in rects])
    # Work on the minimization form g = -value.
    g = np.array([-r.value for r in rects])
    g_min = -best
    selected: list[_Rect] = []
    # Per diameter class keep only the best (lowest g, then insertion order).
    class_best: dict[float, int] = {}
    for j, rect in enumerate(rects):
        dj = round(diameters[j], 15)
        i = class_best.get(dj)
        if i is None or g[j] < g[i] or (g[j] == g[i] and rect.order < rects[i].order):
            class_best[dj] = j
    candidates = sorted(class_best.values(), key=lambda j: (diameters[j], g[j], rects[j].order))
    for j in candidates:
        dj, gj = diameters[j], g[j]
        smaller = [i for i in range(len(rects)) if diameters[i] < dj]
        larger = [i for i in range(len(rects)) if diameters[i] > dj]
        left = max(((gj - g[i]) / (dj - diameters[i]) for i in smaller), default=-np.inf)
        right = min(((g[i] - gj) / (diameters[i] - dj) for i in larger), default=np.inf)
        if left > right:
            continue
        if larger:
            # denom can be tiny; inf on overflow still decides the comparison
            with np.errstate(over="ignore"):
                denom = abs(g_min) if g_min != 0.0 else 1.0
                if g_min != 0.0:
                    ok = DIRECT_EPSILON <= (g_min - gj) / denom + (dj / denom) * right
                else:
                    ok = gj <= dj * right
            if not ok:
                continue
        selected.append(rects[j])
    return selected


def direct_maximize(
    objective: Callable[[np.ndarray], float],
    bounds: Bounds,
    max_evals: int = 500,
) -> tuple[np.ndarray, float]:
    """DIRECT search for the maximum of ``objective`` over ``bounds``.

    Returns the best sampled point and value using at most ``max_evals``
    objective evaluations; the domain center is always sampled first.
    """
    if max_evals < 1:
        raise InputError("max_evals must be >= 1")
    d = bounds.dimension
    span = bounds.upper - bounds.lower

    evals = 0

    def evaluate(unit_point: np.ndarray) -> tuple[np.ndarray, float]:
        nonlocal evals
        point = bounds.lower + unit_point * span
        value = float(objective(point))
        if not np.isfinite(value):
            raise NumericalError(f"objective returned non-finite value at {point.tolist()}")
        evals += 1
        return point, value

    center_unit = np.full(d, 0.5)
    best_point, best_value = evaluate(center_unit)
    rects = [_Rect(center_unit, np.zeros(d, dtype=int), best_value, 0)]
    order = 1

    while evals < max_evals:
        chosen = _potentially_optimal(rects, best_value)
        if not chosen:
            chosen = [max(rects, key=lambda r: (r.half_diagonal(), r.value, -r.order))]
        progressed = False
        for rect in chosen:
            if evals >= max_evals:
                break
            axis = int(np.argmin(rect.levels))  # longest side, lowest index on ties
            delta = 3.0 ** (-(rect.levels[axis] + 1))
            children = []
            for direction in (-1.0, 1.0):
                if evals >= max_evals:
                    break
                unit_point = rect.center.copy()
                unit_point[axis] += direction * delta
                point, value = evaluate(unit_point)
                if value > best_value:
                    best_value = value
                    best_point = point
                children.append(_Rect(unit_point, rect.levels.copy(), value, order))
                order += 1
            rect.levels = rect.levels.copy()
            rect.levels[axis] += 1
            for child in children:
                child.levels = rect.levels.copy()
                rects.append(child)
            progressed = True
        if not progressed:
            break
    return best_point, best_value
