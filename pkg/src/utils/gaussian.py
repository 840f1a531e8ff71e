"""
Closed-form Gaussian algebra

Products of 1D Gaussians exp(-k (z - c)^2) are again Gaussians
(the Gaussian product theorem):

    exp(-k1 (z-c1)^2) exp(-k2 (z-c2)^2) = exp(-k (z-c)^2) exp(-mu (c1-c2)^2)

with k = k1 + k2, c = (k1 c1 + k2 c2) / k and mu = k1 k2 / k.
Everything here works in log space so that heavily suppressed terms can be
compared without underflow.
"""
from typing import Sequence
import numpy as np


def gaussian_product(k1: float, c1: float, k2: float, c2: float) -> tuple[float, float, float]:
    """
    Combine two Gaussians into one

    Args:
        k1, k2: Width coefficients (> 0, or k2 == 0 for the identity factor)
        c1, c2: Centers

    Returns:
        tuple: (k, c, log_prefactor) of the product Gaussian
    """
    k = k1 + k2
    c = (k1 * c1 + k2 * c2) / k
    mu = k1 * k2 / k
    return k, c, -mu * (c1 - c2) ** 2


def log_gaussian_integral(coeffs: Sequence[float], centers: Sequence[float]) -> float:
    """
    log of the integral over the real line of prod_i exp(-k_i (z - c_i)^2)

    Args:
        coeffs: Width coefficients k_i (their sum must be > 0)
        centers: Centers c_i

    Returns:
        float: log of the integral
    """
    k = np.asarray(coeffs, dtype=float)
    c = np.asarray(centers, dtype=float)
    total = k.sum()
    if total <= 0:
        raise ValueError("Gaussian integral diverges: total width coefficient must be positive")
    mean = float(np.dot(k, c) / total)
    # sum_i k_i (c_i - mean)^2 is the exponent left after completing the square
    residual = float(np.dot(k, (c - mean) ** 2))
    return 0.5 * np.log(np.pi / total) - residual


def complex_gaussian_integral(a: complex, b: complex, c: complex) -> complex:
    """
    Integral over the real line of exp(-a z^2 + b z + c), Re(a) > 0
    """
    return np.sqrt(np.pi / a) * np.exp(b * b / (4 * a) + c)


def log_softmax_weights(log_values: Sequence[float]) -> np.ndarray:
    """Normalize positive quantities given by their logs; returns weights summing to 1"""
    logs = np.asarray(log_values, dtype=float)
    shifted = np.exp(logs - logs.max())
    return shifted / shifted.sum()
