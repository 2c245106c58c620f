import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plcp_load.laws import GG_AREA, gen_gamma_pdf
from plcp_load.numerics import (
    ExpDerivativeStack,
    QuadratureConfig,
    QuadratureError,
    exp_composition_derivatives,
    exp_composition_scaled,
    gauss_legendre_panels,
    integrate,
)


def _stencil_derivative(f, x0: float, m: int, h: float, half_width: int) -> float:
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    v = np.vander(offsets, increasing=True).T  # v[k, i] = offsets[i]**k
    rhs = np.zeros(offsets.size)
    rhs[m] = math.factorial(m)
    w = np.linalg.solve(v, rhs)
    return float(sum(wi * f(x0 + oi * h) for wi, oi in zip(w, offsets))) / h**m


def central_fd_derivative(f, x0: float, m: int, h: float, half_width: int = 5) -> float:
    """Independent oracle: m-th derivative by an 11-point central stencil with
    one Richardson step (order h^6 -> h^8), weights from Vandermonde moment
    conditions."""
    order = 2 * half_width + 1 - m - (1 if m % 2 else 0)
    d_h = _stencil_derivative(f, x0, m, h, half_width)
    d_h2 = _stencil_derivative(f, x0, m, 0.5 * h, half_width)
    k = 2.0**order
    return (k * d_h2 - d_h) / (k - 1.0)


class TestIntegrate:
    def test_exponential_normalization(self):
        res = integrate(lambda x: math.exp(-x), 0.0, math.inf)
        assert res.value == pytest.approx(1.0, abs=1e-8)
        assert res.error <= max(1e-12, 1e-8 * abs(res.value))

    def test_polynomial(self):
        res = integrate(lambda x: x * x, 0.0, 1.0)
        assert res.value == pytest.approx(1.0 / 3.0, rel=1e-10)

    def test_normalized_generalized_gamma(self):
        res = integrate(lambda x: float(gen_gamma_pdf(GG_AREA, x)), 0.0, math.inf)
        assert res.value == pytest.approx(1.0, abs=1e-7)

    def test_empty_interval(self):
        assert integrate(lambda x: x, 2.0, 2.0).value == 0.0

    def test_nan_reports_abscissa(self):
        def bad(x):
            return math.nan if x > 0.4 else 1.0

        with pytest.raises(QuadratureError) as exc:
            integrate(bad, 0.0, 1.0)
        assert exc.value.abscissa is not None
        assert exc.value.abscissa > 0.4

    def test_nonconvergence_carries_best_estimate(self):
        cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=3)
        with pytest.raises(QuadratureError) as exc:
            integrate(lambda x: math.sin(50.0 / (x + 0.01)), 0.0, 1.0, cfg)
        assert math.isfinite(exc.value.best_estimate)
        assert exc.value.error_estimate > 0.0

    def test_infinite_tail_cut_rescales(self):
        # a slowly decaying integrand converges with a wider mapped tail too
        cfg = QuadratureConfig(infinite_tail_cut=10.0)
        res = integrate(lambda x: math.exp(-x / 30.0) / 30.0, 0.0, math.inf, cfg)
        assert res.value == pytest.approx(1.0, rel=1e-7)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QuadratureConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureConfig(max_subdivisions=0)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=11))
    def test_polynomial_matches_antiderivative(self, coeffs):
        # degree <= 10 on [0, 1] against the closed-form antiderivative
        poly = np.polynomial.Polynomial(coeffs)
        exact = poly.integ()(1.0) - poly.integ()(0.0)
        res = integrate(lambda x: float(poly(x)), 0.0, 1.0)
        assert res.value == pytest.approx(exact, rel=1e-8, abs=1e-10)


class TestExpCompositionDerivatives:
    def test_pure_exponential(self):
        # h(s) = -s at s=1: G^(k) = (-1)^k e^-1
        g = exp_composition_derivatives([-1.0, 0.0, 0.0], math.exp(-1.0))
        expected = [(-1.0) ** k * math.exp(-1.0) for k in range(4)]
        np.testing.assert_allclose(g, expected, rtol=1e-14)

    def test_gaussian_fourth_derivative(self):
        # h(s) = -s^2 at s=0: derivatives of exp(-s^2) are [1, 0, -2, 0, 12]
        g = exp_composition_derivatives([0.0, -2.0, 0.0, 0.0], 1.0)
        np.testing.assert_allclose(g, [1.0, 0.0, -2.0, 0.0, 12.0], atol=1e-14)

    def test_order_zero(self):
        np.testing.assert_array_equal(exp_composition_derivatives([], 0.7), [0.7])

    def test_overflow_suggests_scaled_path(self):
        with pytest.raises(OverflowError, match="log domain|scaled"):
            exp_composition_derivatives([1e300] * 4, 1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            exp_composition_derivatives([math.nan], 1.0)

    def test_stack_expand(self):
        stack = ExpDerivativeStack(h_derivs=(-1.0, 0.0), g0=math.exp(-1.0))
        np.testing.assert_allclose(stack.expand(), exp_composition_derivatives([-1.0, 0.0], math.exp(-1.0)))
        with pytest.raises(ValueError):
            ExpDerivativeStack(h_derivs=(math.inf,), g0=1.0)
        with pytest.raises(ValueError):
            ExpDerivativeStack(h_derivs=(0.0,), g0=0.0)

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(st.floats(-0.6, 0.6), min_size=5, max_size=5),
        st.floats(-0.5, 0.5),
    )
    def test_matches_finite_differences(self, coeffs, s0):
        # spec property: agreement with central FD of exp(h) to 1e-4 for m <= 5
        h_poly = np.polynomial.Polynomial(coeffs)

        def g(s):
            return math.exp(float(h_poly(s)))

        h_derivs = [float(h_poly.deriv(k)(s0)) for k in range(1, 6)]
        ours = exp_composition_derivatives(h_derivs, g(s0))
        # FD roundoff floor: ~eps * sum|w| / h^5 relative to the function scale
        floor = 2e-5 * max(1.0, float(np.max(np.abs(ours))))
        for m in range(1, 6):
            fd = central_fd_derivative(g, s0, m, h=0.08)
            assert ours[m] == pytest.approx(fd, rel=1e-4, abs=floor)

    def test_deterministic_bit_identical(self):
        h = [0.3, -1.7, 0.21, -0.005]
        a = exp_composition_derivatives(h, 1.234)
        b = exp_composition_derivatives(h, 1.234)
        assert a.tobytes() == b.tobytes()


class TestExpCompositionScaled:
    def test_matches_raw_recurrence(self):
        # T_m = x^m G^(m) / m! for any scale x
        rng = np.random.default_rng(5)
        h = rng.normal(size=6)
        g0 = 0.8
        x = -1.7
        raw = exp_composition_derivatives(h, g0)
        scaled_h = np.array([x**j * h[j - 1] / math.factorial(j) for j in range(1, 7)])
        t = exp_composition_scaled(scaled_h, g0)
        expected = [x**m * raw[m] / math.factorial(m) for m in range(7)]
        np.testing.assert_allclose(t, expected, rtol=1e-12)

    def test_broadcasts_rows(self):
        H = np.array([[0.5, 0.1], [1.0, 0.0]])
        t = exp_composition_scaled(H, np.array([1.0, 2.0]))
        assert t.shape == (2, 3)
        single = exp_composition_scaled(H[1], 2.0)
        np.testing.assert_allclose(t[1], single)

    def test_poisson_special_case(self):
        # h(s) = -mu*s and x = -1 give the Poisson(mu) pmf
        mu = 3.0
        m = 30
        H = np.zeros(m)
        H[0] = mu
        t = exp_composition_scaled(H, math.exp(-mu))
        from scipy.stats import poisson

        np.testing.assert_allclose(t, poisson.pmf(np.arange(m + 1), mu), rtol=1e-10)


def test_gauss_legendre_panels_exactness():
    x, w = gauss_legendre_panels([0.0, 0.3, 1.0], 8)
    # 8-node Gauss is exact through degree 15
    assert float(np.dot(w, x**15)) == pytest.approx(1.0 / 16.0, rel=1e-13)
    with pytest.raises(ValueError):
        gauss_legendre_panels([1.0, 0.0], 4)
