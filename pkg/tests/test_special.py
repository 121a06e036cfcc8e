import math

import numpy as np
import pytest
import scipy.integrate

from fracvar.special import (
    GammaOverflowError,
    GammaPoleError,
    MittagLefflerError,
    MLParams,
    erfc,
    gamma,
    mittag_leffler,
)


class TestGamma:
    def test_factorial_point(self):
        assert gamma(1.0) == 1.0

    def test_half_integer(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
        assert gamma(0.5) == pytest.approx(1.7724538509055160, rel=1e-15)

    def test_recurrence_oracle(self):
        # gamma(4.5) built up from gamma(0.5) by the recurrence, independently
        # of the implementation under test
        expected = math.sqrt(math.pi)
        for x in (0.5, 1.5, 2.5, 3.5):
            expected *= x
        assert expected == pytest.approx(11.631728396567449, rel=1e-14)
        assert gamma(4.5) == pytest.approx(expected, rel=1e-12)

    def test_recurrence_property(self):
        for x in np.linspace(0.5, 20.0, 79):
            assert abs(gamma(x + 1.0) - x * gamma(x)) <= 1e-12 * gamma(x + 1.0)

    def test_pole(self):
        for x in (0.0, -1.0, -2.0, -17.0):
            with pytest.raises(GammaPoleError):
                gamma(x)

    def test_overflow(self):
        with pytest.raises(GammaOverflowError):
            gamma(200.0)

    def test_accuracy_range(self):
        # spot-check 12 significant digits across [0.01, 170] against the
        # log-gamma route
        for x in (0.01, 0.1, 1.0, 7.3, 42.0, 120.0, 170.0):
            assert gamma(x) == pytest.approx(math.exp(math.lgamma(x)), rel=1e-12)


class TestErfc:
    def test_at_zero(self):
        assert erfc(0.0) == 1.0

    def test_tail(self):
        assert erfc(10.0) < 1e-40

    def test_quadrature_oracle(self):
        # erfc(1) from adaptive quadrature of the defining integral
        integral, _ = scipy.integrate.quad(lambda s: math.exp(-s * s), 0.0, 1.0, epsabs=1e-14)
        expected = 1.0 - 2.0 / math.sqrt(math.pi) * integral
        assert expected == pytest.approx(0.15729920705028513, rel=1e-13)
        assert erfc(1.0) == pytest.approx(expected, rel=1e-10)

    def test_symmetry(self):
        for x in (0.3, 1.7, 4.0):
            assert erfc(-x) == pytest.approx(2.0 - erfc(x), rel=1e-14)


class TestMittagLeffler:
    def test_params_validation(self):
        with pytest.raises(ValueError):
            MLParams(0.0, 1.0)
        with pytest.raises(ValueError):
            MLParams(1.0, -2.0)

    def test_exponential_point(self):
        assert mittag_leffler(MLParams(1.0, 1.0), 1.0) == pytest.approx(
            2.718281828459045, rel=1e-14
        )

    def test_at_zero(self):
        assert mittag_leffler(MLParams(0.7, 2.5), 0.0) == pytest.approx(
            1.0 / gamma(2.5), rel=1e-15
        )
        assert mittag_leffler(MLParams(0.7, 1.0), 0.0) == 1.0

    def test_erfc_identity_point(self):
        # E_{1/2,1}(-1) = e * erfc(1), with erfc from the verified oracle above
        expected = math.e * erfc(1.0)
        assert expected == pytest.approx(0.4275835761558070, rel=1e-12)
        assert mittag_leffler(MLParams(0.5, 1.0), -1.0) == pytest.approx(expected, rel=1e-12)

    def test_exponential_range(self):
        p = MLParams(1.0, 1.0)
        for z in np.linspace(-5.0, 5.0, 41):
            assert abs(mittag_leffler(p, float(z)) - math.exp(z)) <= 1e-12 * math.exp(abs(z))

    def test_erfc_identity_range(self):
        p = MLParams(0.5, 1.0)
        for x in np.linspace(0.0, 5.0, 26):
            expected = math.exp(x * x) * erfc(float(x))
            assert abs(mittag_leffler(p, -float(x)) - expected) <= 1e-10

    def test_small_first_parameter(self):
        # terms decay too slowly for direct summation; the accelerated path
        # must still agree with the alpha -> 0 limit 1/(1 - z) to O(alpha)
        value = mittag_leffler(MLParams(0.001, 1.0), -1.0)
        assert value == pytest.approx(0.5, abs=2e-3)
        assert value == pytest.approx(0.499855696078524, rel=1e-10)

    def test_non_convergence(self):
        with pytest.raises(MittagLefflerError):
            mittag_leffler(MLParams(1.0, 1.0), 5.0, max_terms=3)
