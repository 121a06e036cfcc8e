"""Uniform grids, sampled functions, and discrete derivative operators.

The fractional operators are first-order (unshifted) Grunwald-Letnikov
discretizations of the left and right Riemann-Liouville derivatives of order
0 < alpha < 1, stored as dense triangular matrices.  Row 0 of a left operator
and row n-1 of a right operator are boundary rows: the continuous derivative
is singular there whenever the function does not vanish at that endpoint, so
callers exclude them from residual norms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .special import gamma

__all__ = [
    "GridMismatchError",
    "Grid",
    "SampledFunction",
    "FracOrder",
    "Side",
    "FracOperator",
    "gl_weights",
    "assemble_frac_operator",
    "apply",
    "left_derivative_split",
    "classical_derivative",
    "trapezoid_integral",
    "variational_weights",
]


class GridMismatchError(ValueError):
    """Operator and sampled function live on different grids."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n nodes on [a, b]."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a!r}, b={self.b!r}")
        if self.n < 3:
            raise ValueError(f"need at least 3 nodes, got n={self.n!r}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)


@dataclass(frozen=True)
class SampledFunction:
    """Real-valued function sampled on a uniform grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled values must all be finite")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "SampledFunction":
        return cls(grid, np.asarray(fn(grid.nodes()), dtype=float))


@dataclass(frozen=True)
class FracOrder:
    """Fractional order restricted to (0, 1)."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"fractional order must lie in (0, 1), got {self.alpha!r}")


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, eq=False)
class FracOperator:
    """Dense triangular Grunwald-Letnikov matrix for one side and order."""

    grid: Grid
    order: FracOrder
    side: Side
    weights: np.ndarray

    @property
    def boundary_row(self) -> int:
        """Row where the continuous derivative may be singular (Remark-type endpoint)."""
        return 0 if self.side is Side.LEFT else self.grid.n - 1


def gl_weights(order: FracOrder, count: int) -> np.ndarray:
    """Grunwald-Letnikov weights w_j = (-1)^j * binom(alpha, j), j < count."""
    if count < 1:
        raise ValueError(f"need count >= 1, got {count!r}")
    alpha = order.alpha
    w = np.empty(count)
    w[0] = 1.0
    for j in range(1, count):
        w[j] = w[j - 1] * (1.0 - (alpha + 1.0) / j)
    return w


def assemble_frac_operator(grid: Grid, order: FracOrder, side: Side) -> FracOperator:
    w = gl_weights(order, grid.n) / grid.h**order.alpha
    n = grid.n
    mat = np.zeros((n, n))
    idx = np.arange(n)
    lower = idx[:, None] - idx[None, :]
    mask = lower >= 0
    mat[mask] = w[lower[mask]]
    if side is Side.RIGHT:
        mat = mat.T.copy()
    mat.flags.writeable = False
    return FracOperator(grid=grid, order=order, side=side, weights=mat)


def apply(op: FracOperator, f: SampledFunction) -> SampledFunction:
    """Matrix-vector application of the operator; linear in f."""
    if f.grid != op.grid:
        raise GridMismatchError("operator and function are sampled on different grids")
    return SampledFunction(f.grid, op.weights @ f.values)


def left_derivative_split(op: FracOperator, f: SampledFunction) -> SampledFunction:
    """Left derivative with the nonzero-boundary split.

    The plain GL sum converges slowly through the singular part generated by a
    nonzero left boundary value; splitting f = f(a) + (f - f(a)) and adding the
    analytic derivative of the constant, f(a) * (t-a)^(-alpha) / Gamma(1-alpha),
    restores accuracy at interior nodes.  Node 0 keeps the plain GL value
    (the continuous derivative is infinite there when f(a) != 0).
    """
    if op.side is not Side.LEFT:
        raise ValueError("boundary split applies to left operators only")
    if f.grid != op.grid:
        raise GridMismatchError("operator and function are sampled on different grids")
    fa = f.values[0]
    out = op.weights @ (f.values - fa)
    if fa != 0.0:
        alpha = op.order.alpha
        t = f.grid.nodes()
        out[1:] += fa * (t[1:] - f.grid.a) ** (-alpha) / gamma(1.0 - alpha)
        out[0] = (op.weights @ f.values)[0]
    return SampledFunction(f.grid, out)


def classical_derivative(f: SampledFunction) -> SampledFunction:
    """Second-order first derivative: central stencils inside, one-sided at ends."""
    v = f.values
    h = f.grid.h
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return SampledFunction(f.grid, out)


def trapezoid_integral(f: SampledFunction) -> float:
    """Composite trapezoid rule; exact on affine integrands."""
    v = f.values
    return float(f.grid.h * (np.sum(v) - 0.5 * (v[0] + v[-1])))


def variational_weights(grid: Grid) -> np.ndarray:
    """Quadrature weights used to discretize variational functionals.

    These are trapezoid weights with modified entries near the endpoints,
    h * [1/4, 5/4, 1, ..., 1, 5/4, 1/4].  The modification is the discrete
    summation-by-parts condition for the second-order difference stencil:
    the transposed stencil annihilates the weight vector on interior columns,
    so affine extremals are exact stationary points of the discrete
    functional.  Still second-order accurate and exact on affine integrands.
    """
    h = grid.h
    w = np.full(grid.n, h)
    if grid.n >= 5:
        w[0] = w[-1] = h / 4.0
        w[1] = w[-2] = 5.0 * h / 4.0
    else:
        w[0] = w[-1] = h / 2.0
    w.flags.writeable = False
    return w
