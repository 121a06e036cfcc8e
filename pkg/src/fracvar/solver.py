"""Direct-method solvers.

Unconstrained problems are minimized over interior node values with
limited-memory quasi-Newton descent (L-BFGS) followed by an exact-Newton
polish built from the Lagrangian's second partials; the polish drives the
gradient far below what L-BFGS alone reaches, which the residual certificates
need.  Isoperimetric problems wrap the same inner solve in a scalar root-find
on the multiplier lambda of H = F - lambda*G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .fracgrid import SampledFunction
from .lagrange_dsl import AugmentedLagrangian
from .variational import (
    Problem,
    constraint_value,
    discrete_operators,
    el_residual,
    functional_value,
)

__all__ = [
    "BracketFailureError",
    "SolverOptions",
    "Solution",
    "solve_unconstrained",
    "solve_isoperimetric",
]


class BracketFailureError(RuntimeError):
    """The constraint residual does not change sign over the multiplier bracket.

    This can signal that the sought extremizer is an extremal of the
    constraint functional itself, for which no multiplier exists.
    """


@dataclass
class SolverOptions:
    max_iters: int = 500
    grad_tol: float = 1e-9
    constraint_tol: float = 1e-9
    line_search: str = "backtracking-armijo"
    memory: int = 10
    lambda_bracket: tuple[float, float] = (-1e6, 1e6)

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if min(self.grad_tol, self.constraint_tol) <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass
class Solution:
    y: SampledFunction
    objective: float
    el_norm: float
    iterations: int
    converged: bool
    lam: float | None = None
    constraint_residual: float | None = None


class _Discretized:
    """Precomputed pieces for minimizing one H over interior node values."""

    def __init__(self, p: Problem, lagr):
        self.p = p
        self.lagr = lagr
        ops = discrete_operators(p.grid, p.order)
        self.t = ops.nodes
        self.w = ops.weights
        self.m = ops.combined_matrix(p.k)
        self.c = ops.split_correction(p.k, p.ya)

    def assemble(self, x: np.ndarray) -> np.ndarray:
        y = np.empty(self.p.grid.n)
        y[0] = self.p.ya
        y[-1] = self.p.yb
        y[1:-1] = x
        return y

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        y = self.assemble(x)
        v = self.m @ y + self.c
        vals = self.lagr.value(self.t, y, v)
        d2 = self.lagr.dy(self.t, y, v)
        d3 = self.lagr.dv(self.t, y, v)
        obj = float(np.dot(self.w, vals))
        grad = (self.w * d2 + self.m.T @ (self.w * d3))[1:-1]
        return obj, grad

    def hessian(self, x: np.ndarray) -> np.ndarray:
        y = self.assemble(x)
        v = self.m @ y + self.c
        d22 = self.lagr.dyy(self.t, y, v)
        d23 = self.lagr.dyv(self.t, y, v)
        d33 = self.lagr.dvv(self.t, y, v)
        wm = self.w[:, None] * self.m
        hess = (
            np.diag(self.w * d22)
            + (self.w * d23)[:, None] * self.m
            + self.m.T * (self.w * d23)[None, :]
            + self.m.T @ ((self.w * d33)[:, None] * self.m)
        )
        return hess[1:-1, 1:-1]


def _newton_polish(
    disc: _Discretized, x: np.ndarray, opts: SolverOptions, target: float
) -> tuple[np.ndarray, int]:
    """Drive the gradient max-norm toward `target` with safeguarded Newton steps."""
    obj, grad = disc.value_and_grad(x)
    gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
    iters = 0
    for _ in range(25):
        if gmax <= target:
            break
        try:
            hess = disc.hessian(x)
            step = scipy.linalg.solve(hess, -grad, assume_a="sym")
        except (scipy.linalg.LinAlgError, ValueError):
            break
        if not np.all(np.isfinite(step)):
            break
        slope = float(np.dot(grad, step))
        alpha = 1.0
        accepted = False
        for _ in range(40):
            x_new = x + alpha * step
            try:
                obj_new, grad_new = disc.value_and_grad(x_new)
            except ArithmeticError:
                alpha *= 0.5
                continue
            gmax_new = float(np.max(np.abs(grad_new))) if grad_new.size else 0.0
            armijo = obj_new <= obj + 1e-4 * alpha * slope
            # near the floating floor the objective is flat; accept on
            # gradient decrease instead
            flat_improve = (
                obj_new <= obj + 1e-12 * max(1.0, abs(obj)) and gmax_new < gmax
            )
            if armijo or flat_improve:
                x, obj, grad, gmax = x_new, obj_new, grad_new, gmax_new
                accepted = True
                break
            alpha *= 0.5
        iters += 1
        if not accepted:
            break
    return x, iters


def _minimize(p: Problem, lagr, opts: SolverOptions) -> tuple[SampledFunction, int, bool]:
    """L-BFGS descent from the affine interpolant, then Newton polish."""
    disc = _Discretized(p, lagr)
    t = p.grid.nodes()
    y0 = p.ya + (p.yb - p.ya) * (t - p.grid.a) / (p.grid.b - p.grid.a)
    x0 = y0[1:-1]

    result = scipy.optimize.minimize(
        disc.value_and_grad,
        x0,
        jac=True,
        method="L-BFGS-B",
        options=dict(
            maxiter=opts.max_iters,
            maxfun=20 * opts.max_iters,
            maxcor=opts.memory,
            ftol=1e-18,
            gtol=opts.grad_tol,
        ),
    )
    if not np.all(np.isfinite(result.x)):
        raise FloatingPointError("line search produced a non-finite iterate")

    polish_target = min(opts.grad_tol, 1e-12)
    x, polish_iters = _newton_polish(disc, result.x, opts, polish_target)
    _, grad = disc.value_and_grad(x)
    gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
    converged = gmax <= opts.grad_tol
    y = SampledFunction(p.grid, disc.assemble(x))
    return y, int(result.nit) + polish_iters, converged


def solve_unconstrained(p: Problem, opts: SolverOptions | None = None) -> Solution:
    """Minimize the discretized functional; p must have no constraint."""
    if p.constrained:
        raise ValueError("problem has an isoperimetric constraint; use solve_isoperimetric")
    opts = opts or SolverOptions()
    y, iters, converged = _minimize(p, p.f, opts)
    return Solution(
        y=y,
        objective=functional_value(p, y),
        el_norm=el_residual(p, y).norm_max_interior,
        iterations=iters,
        converged=converged,
    )


def _seed_multiplier(p: Problem) -> float:
    # Fast path for the quadratic family F = v^2, G = v, whose multiplier is 2*xi.
    f_src = (p.f.source or "").replace(" ", "")
    g_src = (p.g.source or "").replace(" ", "") if p.g is not None else ""
    if f_src == "v^2" and g_src == "v":
        return 2.0 * p.xi
    return 0.0


def solve_isoperimetric(p: Problem, opts: SolverOptions | None = None) -> Solution:
    """Outer root-find on lambda, inner unconstrained minimization of H."""
    if not p.constrained:
        raise ValueError("problem has no isoperimetric constraint; use solve_unconstrained")
    opts = opts or SolverOptions()
    lo, hi = opts.lambda_bracket

    cache: dict[float, tuple[SampledFunction, int, bool, float]] = {}

    def probe(lam: float) -> tuple[SampledFunction, int, bool, float]:
        if lam not in cache:
            y, iters, conv = _minimize(p, AugmentedLagrangian(p.f, p.g, lam), opts)
            cache[lam] = (y, iters, conv, constraint_value(p, y) - p.xi)
        return cache[lam]

    def finish(lam: float) -> Solution:
        y, _, inner_conv, res = probe(lam)
        total_iters = sum(entry[1] for entry in cache.values())
        converged = inner_conv and abs(res) <= opts.constraint_tol
        return Solution(
            y=y,
            objective=functional_value(p, y),
            el_norm=el_residual(p, y, lam).norm_max_interior,
            iterations=total_iters,
            converged=converged,
            lam=lam,
            constraint_residual=res,
        )

    lam0 = min(max(_seed_multiplier(p), lo), hi)
    _, _, _, r0 = probe(lam0)
    if abs(r0) <= opts.constraint_tol:
        return finish(lam0)

    lam1 = min(max(lam0 + max(1.0, 0.5 * abs(lam0)), lo), hi)
    if lam1 == lam0:
        lam1 = lam0 - max(1.0, 0.5 * abs(lam0))
    _, _, _, r1 = probe(lam1)

    bracket: tuple[float, float] | None = None
    if r0 * r1 < 0.0:
        bracket = (lam0, lam1)
    else:
        # geometric expansion away from the seed until the residual changes sign
        span = abs(lam1 - lam0)
        direction = -1.0 if abs(r1) > abs(r0) else 1.0
        base = lam0 if direction < 0.0 else lam1
        r_base = r0 if direction < 0.0 else r1
        for _ in range(60):
            span *= 2.0
            cand = base + direction * span
            if cand < lo or cand > hi:
                cand = lo if direction < 0.0 else hi
            _, _, _, r_cand = probe(cand)
            if r_base * r_cand < 0.0:
                bracket = tuple(sorted((base, cand)))  # type: ignore[assignment]
                break
            if cand in (lo, hi):
                raise BracketFailureError(
                    "constraint residual does not change sign over the multiplier "
                    "bracket; the extremizer may be an extremal of the constraint"
                )
        if bracket is None:
            raise BracketFailureError(
                "constraint residual does not change sign over the multiplier bracket"
            )

    a, b = bracket
    ra = probe(a)[3]
    rb = probe(b)[3]
    best = a if abs(ra) <= abs(rb) else b
    for _ in range(80):
        if abs(probe(best)[3]) <= opts.constraint_tol:
            return finish(best)
        # secant proposal, safeguarded by bisection within the bracket
        denom = rb - ra
        cand = b - rb * (b - a) / denom if denom != 0.0 else 0.5 * (a + b)
        if not (a < cand < b):
            cand = 0.5 * (a + b)
        rc = probe(cand)[3]
        if abs(rc) <= opts.constraint_tol:
            return finish(cand)
        if ra * rc < 0.0:
            b, rb = cand, rc
        else:
            a, ra = cand, rc
        best = cand
        if b - a <= 1e-15 * max(1.0, abs(a) + abs(b)):
            break
    return finish(best)
