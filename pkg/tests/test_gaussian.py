"""
Tests for closed-form Gaussian algebra
"""
import math
import numpy as np
import pytest
from scipy import integrate
from utils.gaussian import (
    complex_gaussian_integral, gaussian_product, log_gaussian_integral, log_softmax_weights
)


def test_gaussian_product_pointwise():
    """Test product Gaussian equals the pointwise product"""
    k, c, log_pref = gaussian_product(1.5, -1.0, 0.5, 2.0)
    z = np.linspace(-4.0, 4.0, 17)
    direct = np.exp(-1.5 * (z + 1.0) ** 2) * np.exp(-0.5 * (z - 2.0) ** 2)
    combined = np.exp(log_pref) * np.exp(-k * (z - c) ** 2)
    np.testing.assert_allclose(combined, direct, rtol=1e-12)


def test_gaussian_product_identity_factor():
    """Test a zero-width factor leaves the Gaussian unchanged"""
    assert gaussian_product(2.0, 1.0, 0.0, 5.0) == (2.0, 1.0, 0.0)


def test_log_gaussian_integral_numeric():
    """Test closed form against quadrature"""
    value, _ = integrate.quad(lambda z: math.exp(-2.0 * (z - 1.0) ** 2 - 0.5 * (z + 1.0) ** 2), -20, 20)
    assert log_gaussian_integral([2.0, 0.5], [1.0, -1.0]) == pytest.approx(math.log(value), rel=1e-10)


def test_log_gaussian_integral_divergent():
    """Test zero total width is rejected"""
    with pytest.raises(ValueError):
        log_gaussian_integral([0.0], [0.0])


def test_complex_gaussian_integral_real_case():
    """Test real parameters reduce to the usual integral"""
    assert complex_gaussian_integral(1.0, 0.0, 0.0) == pytest.approx(math.sqrt(math.pi))


def test_log_softmax_weights_underflow():
    """Test weights survive logs far below float range"""
    w = log_softmax_weights([-2000.0, -2000.0 + math.log(3.0)])
    np.testing.assert_allclose(w, [0.25, 0.75])
