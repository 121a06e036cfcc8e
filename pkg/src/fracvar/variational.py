"""Problem model for functionals of the combined derivative y' + k * D^alpha y:
functional and constraint values, the Euler-Lagrange residual, and the discrete
gradient (first variation) with respect to interior node values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fracgrid import (
    FracOperator,
    FracOrder,
    Grid,
    GridMismatchError,
    SampledFunction,
    Side,
    assemble_frac_operator,
    classical_derivative,
    left_derivative_split,
    variational_weights,
)
from .lagrange_dsl import AugmentedLagrangian, Lagrangian
from .special import gamma

__all__ = [
    "MissingConstraintError",
    "BoundaryMismatchError",
    "Problem",
    "CombinedDerivative",
    "ELResidual",
    "combined_derivative",
    "functional_value",
    "constraint_value",
    "el_residual",
    "discrete_gradient",
    "discrete_operators",
]


class MissingConstraintError(ValueError):
    """Constraint operation invoked on a problem without an isoperimetric pair."""


class BoundaryMismatchError(ValueError):
    """Trajectory does not satisfy the problem's boundary conditions."""


@dataclass(frozen=True)
class Problem:
    """Variational problem data: F, optional (G, xi), mixing k, order, grid, BCs."""

    f: Lagrangian
    k: float
    order: FracOrder
    grid: Grid
    ya: float
    yb: float
    g: Lagrangian | None = None
    xi: float | None = None

    def __post_init__(self) -> None:
        if (self.g is None) != (self.xi is None):
            raise ValueError("isoperimetric constraint requires both G and xi")
        if not (math.isfinite(self.ya) and math.isfinite(self.yb)):
            raise ValueError("boundary values must be finite")

    @property
    def constrained(self) -> bool:
        return self.g is not None


@dataclass(frozen=True)
class CombinedDerivative:
    """v = y' + k * (left fractional derivative of y), with its two pieces."""

    v: SampledFunction
    yprime: SampledFunction
    frac: SampledFunction


@dataclass(frozen=True)
class ELResidual:
    """Euler-Lagrange residual samples with interior-only norms."""

    values: SampledFunction
    norm_max_interior: float
    norm_l2_interior: float


class _DiscreteOps:
    """Grid-level matrices shared by the variational operations."""

    def __init__(self, grid: Grid, order: FracOrder):
        self.grid = grid
        self.order = order
        self.nodes = grid.nodes()
        self.weights = variational_weights(grid)
        self.left = assemble_frac_operator(grid, order, Side.LEFT)
        self.right = assemble_frac_operator(grid, order, Side.RIGHT)
        self.dc = _difference_matrix(grid)

    def combined_matrix(self, k: float) -> np.ndarray:
        return self.dc + k * self.left.weights

    def split_correction(self, k: float, ya: float) -> np.ndarray:
        """Constant vector c with v = (Dc + k*L) y + c under the boundary split."""
        n = self.grid.n
        if k == 0.0 or ya == 0.0:
            return np.zeros(n)
        alpha = self.order.alpha
        out = np.zeros(n)
        t = self.nodes
        analytic = ya * (t[1:] - self.grid.a) ** (-alpha) / gamma(1.0 - alpha)
        out[1:] = k * (analytic - ya * np.sum(self.left.weights[1:, :], axis=1))
        return out


def _difference_matrix(grid: Grid) -> np.ndarray:
    n = grid.n
    h = grid.h
    d = np.zeros((n, n))
    i = np.arange(1, n - 1)
    d[i, i - 1] = -1.0 / (2.0 * h)
    d[i, i + 1] = 1.0 / (2.0 * h)
    d[0, 0], d[0, 1], d[0, 2] = -3.0 / (2.0 * h), 4.0 / (2.0 * h), -1.0 / (2.0 * h)
    d[-1, -1], d[-1, -2], d[-1, -3] = 3.0 / (2.0 * h), -4.0 / (2.0 * h), 1.0 / (2.0 * h)
    return d


@lru_cache(maxsize=64)
def discrete_operators(grid: Grid, order: FracOrder) -> _DiscreteOps:
    return _DiscreteOps(grid, order)


def _check_grid(p: Problem, y: SampledFunction) -> None:
    if y.grid != p.grid:
        raise GridMismatchError("trajectory is sampled on a different grid")


def combined_derivative(p: Problem, y: SampledFunction) -> CombinedDerivative:
    """Evaluate v = y' + k * left fractional derivative (with boundary split)."""
    _check_grid(p, y)
    ops = discrete_operators(p.grid, p.order)
    yprime = classical_derivative(y)
    frac = left_derivative_split(ops.left, y)
    v = SampledFunction(p.grid, yprime.values + p.k * frac.values)
    return CombinedDerivative(v=v, yprime=yprime, frac=frac)


def _lagrangian_for(p: Problem, lam: float | None):
    if lam is None:
        return p.f
    if p.g is None:
        raise MissingConstraintError("multiplier given but the problem has no constraint")
    return AugmentedLagrangian(p.f, p.g, lam)


def functional_value(p: Problem, y: SampledFunction) -> float:
    """Discretized J(y): quadrature of F(t, y, v) over the grid."""
    _check_grid(p, y)
    ops = discrete_operators(p.grid, p.order)
    v = combined_derivative(p, y).v
    vals = p.f.value(ops.nodes, y.values, v.values)
    return float(np.dot(ops.weights, vals))


def constraint_value(p: Problem, y: SampledFunction) -> float:
    """Discretized I(y): quadrature of G(t, y, v)."""
    if p.g is None:
        raise MissingConstraintError("problem has no isoperimetric constraint")
    _check_grid(p, y)
    ops = discrete_operators(p.grid, p.order)
    v = combined_derivative(p, y).v
    vals = p.g.value(ops.nodes, y.values, v.values)
    return float(np.dot(ops.weights, vals))


def el_residual(p: Problem, y: SampledFunction, lam: float | None = None) -> ELResidual:
    """Euler-Lagrange residual of H = F - lam*G (or plain F when lam is None):

    r_i = dH/dy - Dc[dH/dv] + k * (right fractional derivative of dH/dv)

    with the classical stencil Dc and the right GL operator applied to the
    sampled dH/dv sequence.  Norms are over interior nodes only.
    """
    _check_grid(p, y)
    if p.g is not None and lam is None:
        raise MissingConstraintError("constrained problem requires a multiplier")
    h_lagr = _lagrangian_for(p, lam)
    ops = discrete_operators(p.grid, p.order)
    v = combined_derivative(p, y).v
    d2 = h_lagr.dy(ops.nodes, y.values, v.values)
    d3 = h_lagr.dv(ops.nodes, y.values, v.values)
    r = d2 - ops.dc @ d3 + p.k * (ops.right.weights @ d3)
    interior = r[1:-1]
    norm_max = float(np.max(np.abs(interior)))
    norm_l2 = float(math.sqrt(p.grid.h * float(np.dot(interior, interior))))
    return ELResidual(
        values=SampledFunction(p.grid, r),
        norm_max_interior=norm_max,
        norm_l2_interior=norm_l2,
    )


def discrete_gradient(p: Problem, y: SampledFunction, lam: float | None = None) -> np.ndarray:
    """Gradient of the discretized functional with respect to interior nodes.

    Chain rule through the quadrature weights, the difference stencil, and the
    transposed left-operator columns; boundary nodes are held fixed.
    """
    _check_grid(p, y)
    if not math.isclose(y.values[0], p.ya, rel_tol=0.0, abs_tol=1e-9) or not math.isclose(
        y.values[-1], p.yb, rel_tol=0.0, abs_tol=1e-9
    ):
        raise BoundaryMismatchError(
            f"trajectory endpoints ({y.values[0]!r}, {y.values[-1]!r}) do not match "
            f"the boundary conditions ({p.ya!r}, {p.yb!r})"
        )
    h_lagr = _lagrangian_for(p, lam)
    ops = discrete_operators(p.grid, p.order)
    v = combined_derivative(p, y).v
    w = ops.weights
    d2 = h_lagr.dy(ops.nodes, y.values, v.values)
    d3 = h_lagr.dv(ops.nodes, y.values, v.values)
    m = ops.combined_matrix(p.k)
    grad = w * d2 + m.T @ (w * d3)
    return grad[1:-1]
