"""Discretized L2[a, b]: grids with quadrature weights, curves, and a paired
difference sample.

Everything here is immutable. Arrays stored on these objects are made
read-only on construction, so a ``Curve`` can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import GridMismatchError, InputFormatError


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


def trapezoid_weights(points: np.ndarray) -> np.ndarray:
    """Trapezoid-rule weights for an arbitrary strictly increasing grid."""
    points = np.asarray(points, dtype=float)
    if points.size == 1:
        return np.ones(1)
    h = np.diff(points)
    w = np.zeros_like(points)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Observation points ``t_1 < ... < t_m`` with positive quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points)
        weights = _frozen(self.weights)
        if points.ndim != 1 or points.size < 1:
            raise InputFormatError("grid needs at least one point")
        if weights.shape != points.shape:
            raise InputFormatError("weights and points differ in length")
        if not np.all(np.isfinite(points)) or np.any(np.diff(points) <= 0):
            raise InputFormatError("grid points must be finite and strictly increasing")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise InputFormatError("quadrature weights must be positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_points(cls, points: Sequence[float]) -> "Grid":
        """Grid on the given points with trapezoid weights."""
        points = np.asarray(points, dtype=float)
        if points.size >= 2 and np.any(np.diff(points) <= 0):
            raise InputFormatError("grid points must be strictly increasing")
        return cls(points, trapezoid_weights(points))

    @property
    def size(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.size

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )


def make_grid(a: float, b: float, m: int) -> Grid:
    """Equispaced grid of ``m`` points on ``[a, b]`` with trapezoid weights."""
    if not a < b:
        raise InputFormatError(f"need a < b, got a={a}, b={b}")
    if int(m) != m or m < 2:
        raise InputFormatError(f"need an integer m >= 2, got {m}")
    m = int(m)
    points = np.linspace(a, b, m)
    h = (b - a) / (m - 1)
    weights = np.full(m, h)
    weights[0] = weights[-1] = h / 2
    return Grid(points, weights)


def check_same_grid(g1: Grid, g2: Grid) -> None:
    if not g1.same_as(g2):
        raise GridMismatchError("curves are observed on different grids")


@dataclass(frozen=True, eq=False)
class Curve:
    """Function values on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.size,):
            raise InputFormatError(
                f"curve has {values.size} values for a grid of size {self.grid.size}"
            )
        if not np.all(np.isfinite(values)):
            raise InputFormatError("curve values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "Curve":
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Curve":
        return cls(grid, np.broadcast_to(fn(grid.points), (grid.size,)))

    def __neg__(self) -> "Curve":
        return Curve(self.grid, -self.values)

    def __add__(self, other: "Curve") -> "Curve":
        return axpby(1.0, self, 1.0, other)

    def __sub__(self, other: "Curve") -> "Curve":
        return axpby(1.0, self, -1.0, other)

    def __mul__(self, c: float) -> "Curve":
        return Curve(self.grid, c * self.values)

    __rmul__ = __mul__


def inner(f: Curve, g: Curve) -> float:
    """Quadrature inner product ``sum_j w_j f(t_j) g(t_j)``."""
    check_same_grid(f.grid, g.grid)
    return float(np.dot(f.grid.weights * f.values, g.values))


def norm(f: Curve, p: float = 2.0) -> float:
    """L_p norm under the grid quadrature. ``norm(f) ** 2 == inner(f, f)``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 2:
        return float(np.sqrt(inner(f, f)))
    return float(np.dot(f.grid.weights, np.abs(f.values) ** p) ** (1.0 / p))


def axpby(alpha: float, f: Curve, beta: float, g: Curve) -> Curve:
    """Pointwise ``alpha * f + beta * g``."""
    check_same_grid(f.grid, g.grid)
    return Curve(f.grid, alpha * f.values + beta * g.values)


def row_norms(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """L2 norms of each row of an ``(n, m)`` array of curve values.

    Uses the same summation as ``inner`` so that a row norm agrees with
    ``norm`` of the corresponding curve.
    """
    return np.sqrt(np.einsum("ij,ij->i", values * weights, values))


@dataclass(frozen=True, eq=False)
class PairedDiffSample:
    """The ``n`` difference curves ``W_i = Y_i - X_i`` on a shared grid.

    Stored as an ``(n, m)`` array; ``diffs`` gives them back as curves.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[0] < 1:
            raise InputFormatError("a sample needs at least one curve")
        if values.shape[1] != self.grid.size:
            raise InputFormatError(
                f"sample curves have {values.shape[1]} points, grid has {self.grid.size}"
            )
        if not np.all(np.isfinite(values)):
            raise InputFormatError("sample values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_curves(cls, curves: Iterable[Curve]) -> "PairedDiffSample":
        curves = list(curves)
        if not curves:
            raise InputFormatError("a sample needs at least one curve")
        grid = curves[0].grid
        for c in curves[1:]:
            check_same_grid(grid, c.grid)
        return cls(grid, np.stack([c.values for c in curves]))

    @classmethod
    def from_pairs(cls, grid: Grid, x: np.ndarray, y: np.ndarray) -> "PairedDiffSample":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape:
            raise InputFormatError(f"X has shape {x.shape} but Y has shape {y.shape}")
        return cls(grid, y - x)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def diffs(self) -> list[Curve]:
        return [Curve(self.grid, row) for row in self.values]

    def mean(self) -> Curve:
        return Curve(self.grid, self.values.mean(axis=0))

    def norms(self) -> np.ndarray:
        return row_norms(self.values, self.grid.weights)

    def scaled(self, c: float) -> "PairedDiffSample":
        return PairedDiffSample(self.grid, c * self.values)

    def __neg__(self) -> "PairedDiffSample":
        return PairedDiffSample(self.grid, -self.values)

    def subset(self, idx) -> "PairedDiffSample":
        return PairedDiffSample(self.grid, self.values[idx])
