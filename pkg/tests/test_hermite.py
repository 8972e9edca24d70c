"""Hermite machinery against independent oracles: explicit polynomials,
partial sums, and finite differences."""

import math

import numpy as np
import pytest

from wignerflow.hermite import (
    MAX_HERMITE_ORDER,
    HermiteEvaluator,
    gaussian_odd_derivative,
    hermite_eval,
    odd_hermite_generating,
    odd_hermite_series,
)


def test_hermite_low_orders():
    assert hermite_eval(0, 0.7) == 1.0
    assert hermite_eval(1, 0.7) == pytest.approx(1.4, abs=0.0)
    # H_3(x) = 8x^3 - 12x expanded symbolically
    assert hermite_eval(3, 1.0) == pytest.approx(8.0 - 12.0, abs=0.0)
    x = 0.31
    assert hermite_eval(3, x) == pytest.approx(8 * x**3 - 12 * x, rel=1e-14)


def test_recurrence_consistency():
    rng = np.random.default_rng(7)
    x = rng.uniform(-10.0, 10.0, size=50)
    for n in range(1, MAX_HERMITE_ORDER):
        lhs = hermite_eval(n + 1, x)
        rhs = 2 * x * hermite_eval(n, x) - 2 * n * hermite_eval(n - 1, x)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-300)


def test_hermite_evaluator_caps_order():
    ev = HermiteEvaluator(max_order=10)
    assert ev.eval(10, 0.5) == hermite_eval(10, 0.5)
    with pytest.raises(ValueError, match="exceeds"):
        ev.eval(11, 0.5)
    with pytest.raises(ValueError):
        hermite_eval(3, float("nan"))
    with pytest.raises(ValueError):
        hermite_eval(-1, 0.0)


def _partial_sum_oracle(t, x, stop=1e-15):
    """Brute-force odd Hermite series, summed until terms drop below stop."""
    total = 0.0 + 0.0j
    for eta in range(0, 31):
        n = 2 * eta + 1
        term = t**n / math.factorial(n) * hermite_eval(n, x)
        total += term
        if abs(term) < stop and eta >= 1:
            break
    return total


def test_generating_trivial_cases():
    assert odd_hermite_generating(0.0, 1.3) == 0.0
    assert odd_hermite_generating(0.5, 0.0) == 0.0
    assert odd_hermite_generating(0.5j, 0.0) == 0.0


def test_generating_real_parameter():
    value = odd_hermite_generating(0.5, 1.0)
    expected = math.exp(-0.25) * math.sinh(1.0)
    assert value == pytest.approx(expected, rel=1e-14)
    assert value == pytest.approx(_partial_sum_oracle(0.5, 1.0), rel=1e-13)


def test_generating_matches_series_on_grid():
    # pure imaginary parameter: i e^{s^2} sin(2xs)
    for s in np.linspace(0.0, 2.0, 21):
        for x in np.linspace(-4.0, 4.0, 21):
            closed = odd_hermite_generating(1j * s, x)
            series = odd_hermite_series(1j * s, x)
            assert abs(closed - series) <= 1e-10 * (1.0 + abs(closed))


def test_generating_real_matches_series():
    for t in (0.2, 0.9, -1.4):
        for x in (-3.0, 0.7, 2.5):
            closed = odd_hermite_generating(t, x)
            series = odd_hermite_series(t, x)
            assert abs(closed - series) <= 1e-10 * (1.0 + abs(closed))


def test_generating_accepts_arrays():
    x = np.linspace(-2, 2, 11)
    values = odd_hermite_generating(0.5j, x)
    assert values.shape == x.shape
    np.testing.assert_allclose(values.imag, math.e**0.25 * np.sin(x), rtol=1e-13)


def test_generating_overflow_reports_magnitude():
    with pytest.raises(OverflowError, match="729"):
        odd_hermite_generating(27j, 1.0)


def test_generating_rejects_general_complex():
    with pytest.raises(ValueError, match="pure imaginary"):
        odd_hermite_generating(1.0 + 1.0j, 0.5)
    with pytest.raises(ValueError):
        odd_hermite_generating(float("inf"), 0.5)


def test_gaussian_odd_derivative_trivial():
    assert gaussian_odd_derivative(1.0, 1, 0.0) == 0.0
    # d/du e^{-u^2} at u=1 is -2 e^{-1}
    assert gaussian_odd_derivative(1.0, 1, 1.0) == pytest.approx(-2 * math.exp(-1), rel=1e-14)


def test_gaussian_odd_derivative_finite_difference():
    # third derivative of e^{-u^2}: centered stencil at steps 1e-3 and 5e-4,
    # Richardson-combined (the plain h=1e-3 stencil alone is 2e-6 off)
    u = 0.5
    f = lambda v: math.exp(-v * v)

    def stencil(h):
        return (f(u + 2 * h) - 2 * f(u + h) + 2 * f(u - h) - f(u - 2 * h)) / (2 * h**3)

    fd = (4 * stencil(5e-4) - stencil(1e-3)) / 3
    exact = gaussian_odd_derivative(1.0, 3, u)
    assert exact == pytest.approx(fd, rel=1e-6)


def test_gaussian_odd_derivative_squeeze_scaling():
    # a = e^{2z}: the prefactor a^{n/2} is the e^{(2eta+1)z} squeeze factor
    z, u = 0.4, 0.8
    a = math.exp(2 * z)
    n = 5
    expected = -(math.exp(5 * z)) * hermite_eval(5, math.exp(z) * u) * math.exp(-a * u * u)
    assert gaussian_odd_derivative(a, n, u) == pytest.approx(expected, rel=1e-14)


def test_gaussian_odd_derivative_parity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.uniform(0.2, 5.0)
        u = rng.uniform(0.0, 3.0)
        for n in (1, 3, 5, 7):
            left = gaussian_odd_derivative(a, n, -u)
            right = gaussian_odd_derivative(a, n, u)
            assert left == pytest.approx(-right, rel=1e-13, abs=1e-300)


def test_gaussian_odd_derivative_rejects_even_order():
    with pytest.raises(ValueError, match="odd"):
        gaussian_odd_derivative(1.0, 2, 0.5)
    with pytest.raises(ValueError):
        gaussian_odd_derivative(-1.0, 1, 0.5)
