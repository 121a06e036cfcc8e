"""Scalar special functions: gamma, the complementary error function, and the
two-parameter Mittag-Leffler function.

The Mittag-Leffler evaluator is series-only.  Three regimes are handled:

* plain compensated summation when the terms are well behaved,
* extended-precision summation (mpmath) when the alternating series suffers
  catastrophic cancellation (large negative arguments),
* Cohen-Villegas-Zagier acceleration when the terms decay too slowly for
  direct summation (first parameter close to zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

__all__ = [
    "GammaPoleError",
    "GammaOverflowError",
    "MittagLefflerError",
    "MLParams",
    "gamma",
    "erfc",
    "mittag_leffler",
]

#: Largest x for which gamma(x) is finite in IEEE double precision.
_GAMMA_MAX = 171.624376956302


class GammaPoleError(ValueError):
    """gamma() evaluated at a nonpositive integer."""


class GammaOverflowError(OverflowError):
    """gamma() above the double-precision representable range."""


class MittagLefflerError(ArithmeticError):
    """The Mittag-Leffler series did not converge within the term budget."""


def gamma(x: float) -> float:
    """Gamma function, accurate to at least 12 significant digits on [0.01, 170]."""
    if x <= 0.0 and x == math.floor(x):
        raise GammaPoleError(f"gamma has a pole at {x:g}")
    if x > _GAMMA_MAX:
        raise GammaOverflowError(f"gamma({x:g}) overflows double precision")
    return math.gamma(x)


def erfc(x: float) -> float:
    """Complementary error function 1 - (2/sqrt(pi)) * integral_0^x exp(-s^2) ds."""
    return math.erfc(x)


@dataclass(frozen=True)
class MLParams:
    """Parameters of the two-parameter Mittag-Leffler series; both must be > 0."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError(
                f"Mittag-Leffler parameters must be positive, got "
                f"alpha={self.alpha!r}, beta={self.beta!r}"
            )


def _log_abs_term(p: MLParams, log_abs_z: float, j: int) -> float:
    return j * log_abs_z - math.lgamma(p.alpha * j + p.beta)


def _sum_direct(
    p: MLParams, z: float, rel_tol: float, max_terms: int
) -> tuple[float | None, float]:
    """Compensated direct summation.

    Returns (value, max_abs_term); value is None when the series did not
    converge within max_terms or a term overflowed double precision.
    """
    log_abs_z = math.log(abs(z))
    total = 0.0
    comp = 0.0
    max_term = 0.0
    small_streak = 0
    prev_lg = -math.inf
    for j in range(max_terms):
        lg = _log_abs_term(p, log_abs_z, j)
        if lg > 700.0:
            return None, math.inf
        if j >= 256 and j % 128 == 0:
            # hopeless-budget estimate: extrapolate the per-term decay rate
            decay = lg - prev_lg  # log-decay over the last 128 terms
            remaining = max_terms - j
            target = math.log(rel_tol) + math.log(max(abs(total), 1e-300))
            if decay >= 0.0 or lg + decay * (remaining / 128.0) > target:
                return None, max_term
        if j % 128 == 0:
            prev_lg = lg
        term = math.exp(lg)
        if z < 0.0 and j % 2 == 1:
            term = -term
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        max_term = max(max_term, abs(term))
        if j > 0 and abs(term) <= rel_tol * abs(total):
            small_streak += 1
            if small_streak >= 2:
                return total, max_term
        else:
            small_streak = 0
    return None, max_term


def _sum_mpmath(p: MLParams, z: float, rel_tol: float, max_terms: int) -> float:
    """Extended-precision summation sized to the peak term magnitude."""
    peak = 0.0
    log_abs_z = math.log(abs(z))
    for j in range(max_terms):
        peak = max(peak, _log_abs_term(p, log_abs_z, j))
    dps = 25 + max(0, int(peak / math.log(10.0)))
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        total = mpmath.mpf(0)
        tol = mpmath.mpf(rel_tol)
        small_streak = 0
        for j in range(max_terms):
            term = zz**j / mpmath.gamma(p.alpha * j + p.beta)
            total += term
            if j > 0 and abs(term) <= tol * abs(total):
                small_streak += 1
                if small_streak >= 2:
                    return float(total)
            else:
                small_streak = 0
    raise MittagLefflerError(
        f"Mittag-Leffler series for alpha={p.alpha:g}, beta={p.beta:g}, z={z:g} "
        f"did not converge within {max_terms} terms"
    )


def _cvz_accelerate(terms: list[float]) -> float:
    """Cohen-Villegas-Zagier sum of sum_j (-1)^j terms[j], terms[j] >= 0."""
    n = len(terms)
    d = (3.0 + math.sqrt(8.0)) ** n
    d = (d + 1.0 / d) / 2.0
    b = -1.0
    c = -d
    s = 0.0
    for k in range(n):
        c = b - c
        s += c * terms[k]
        b *= (k + n) * (k - n) / ((k + 0.5) * (k + 1.0))
    return s / d


def _sum_alternating_accelerated(p: MLParams, z: float, rel_tol: float) -> float:
    """Accelerated evaluation for z < 0 with slowly decaying, bounded terms."""
    log_abs_z = math.log(abs(z))

    def value(n: int) -> float:
        terms = [math.exp(_log_abs_term(p, log_abs_z, j)) for j in range(n)]
        return _cvz_accelerate(terms)

    prev = value(24)
    for n in (32, 48, 64, 96):
        cur = value(n)
        if abs(cur - prev) <= max(rel_tol * 10.0, 1e-13) * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise MittagLefflerError(
        f"accelerated Mittag-Leffler sum for alpha={p.alpha:g}, beta={p.beta:g}, "
        f"z={z:g} did not stabilize"
    )


def mittag_leffler(
    p: MLParams, z: float, rel_tol: float = 1e-15, max_terms: int = 2000
) -> float:
    """Evaluate sum_{j>=0} z^j / gamma(alpha*j + beta) for real z."""
    if z == 0.0:
        return 1.0 / gamma(p.beta)

    value, max_term = _sum_direct(p, z, rel_tol, max_terms)

    if z > 0.0:
        if value is None:
            raise MittagLefflerError(
                f"Mittag-Leffler series for alpha={p.alpha:g}, beta={p.beta:g}, "
                f"z={z:g} did not converge within {max_terms} terms"
            )
        return value

    # z < 0: the series alternates; accept the direct sum only when the
    # cancellation stays benign (roundoff ~ max_term * eps).
    if value is not None and max_term <= 1e3 * max(abs(value), 1e-300):
        return value

    if math.isinf(max_term) or max_term > 1e15:
        # Heavy cancellation through a large peak term: extended precision.
        return _sum_mpmath(p, z, rel_tol, max_terms)
    if value is not None:
        # Converged but cancellous at a moderate peak: extended precision
        # is still the accurate route.
        return _sum_mpmath(p, z, rel_tol, max_terms)
    # Bounded terms that decay too slowly (alpha close to zero).
    return _sum_alternating_accelerated(p, z, rel_tol)
