"""Numerically careful scalar helpers used by the closed-form models.

The modified Bessel functions are evaluated from their integral
representations with adaptive quadrature; everything is computed in
exponentially scaled form so large arguments never overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

# x * (cosh t - 1) beyond this is below 1e-18 relative (18 * ln 10 = 41.4)
_CUTOFF = 45.0


def _series(x2: float, coeffs) -> float:
    return sum(c * x2 ** k for k, c in enumerate(coeffs))


def log_sinhc(u: float) -> float:
    """log(sinh(u) / u) for u >= 0."""
    u = abs(float(u))
    if u < 0.05:
        return _series(u * u, (0.0, 1 / 6, -1 / 180, 1 / 2835, -1 / 37800))
    if u > 20.0:
        return u + math.log1p(-math.exp(-2.0 * u)) - math.log(2.0 * u)
    return math.log(math.sinh(u) / u)


def langevin(u: float) -> float:
    """coth(u) - 1/u."""
    if abs(u) < 0.05:
        return u * _series(u * u, (1 / 3, -1 / 45, 2 / 945, -1 / 4725))
    return 1.0 / math.tanh(u) - 1.0 / u


def langevin_over_u(u: float) -> float:
    """(coth(u) - 1/u) / u, finite at u = 0."""
    if abs(u) < 0.05:
        return _series(u * u, (1 / 3, -1 / 45, 2 / 945, -1 / 4725))
    return langevin(u) / u


def langevin_prime(u: float) -> float:
    """d/du (coth(u) - 1/u) = 1/u^2 - 1/sinh(u)^2."""
    u = abs(float(u))
    if u < 0.05:
        return _series(u * u, (1 / 3, -1 / 15, 2 / 189, -1 / 675, 2 / 10395))
    if u > 20.0:
        return 1.0 / (u * u) - 4.0 * math.exp(-2.0 * u) / (1.0 - math.exp(-2.0 * u)) ** 2
    return 1.0 / (u * u) - 1.0 / math.sinh(u) ** 2


def one_minus_exp_ratio(x: float) -> float:
    """(1 - exp(-x)) / x, equal to 1 at x = 0."""
    if x == 0.0:
        return 1.0
    return -math.expm1(-x) / x


def log_one_minus_exp_ratio(x: float) -> float:
    """log((1 - exp(-x)) / x) without cancellation or overflow, x >= 0."""
    if x < 1.0:
        return math.log(one_minus_exp_ratio(x))
    return math.log1p(-math.exp(-x)) - math.log(x)


def thermal_excess(x: float) -> float:
    """1/x - 1/(exp(x) - 1); tends to 1/2 at x = 0."""
    if abs(x) < 1e-3:
        return 0.5 - x / 12.0 + x ** 3 / 720.0
    if x > 700.0:
        return 1.0 / x
    return 1.0 / x - 1.0 / math.expm1(x)


def _check_arg(x: float) -> float:
    x = float(x)
    if not x > 0.0 or not math.isfinite(x):
        raise ValueError(f"Bessel K needs a finite positive argument, got {x}")
    return x


def _t_max(x: float) -> float:
    return math.acosh(1.0 + _CUTOFF / x)


def _quad(f, upper: float) -> float:
    val, _ = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=400)
    return val


def bessel_k2(x: float, scaled: bool = False) -> float:
    """K_2(x) = x * int_0^inf exp(-x cosh t) sinh(t)^2 cosh(t) dt.

    With ``scaled=True`` returns exp(x) * K_2(x).
    """
    x = _check_arg(x)

    def f(t):
        # cosh t - 1 = 2 sinh(t/2)^2 keeps the exponent accurate near t = 0
        return math.exp(-2.0 * x * math.sinh(0.5 * t) ** 2) * math.sinh(t) ** 2 * math.cosh(t)

    val = x * _quad(f, _t_max(x))
    return val if scaled else val * math.exp(-x)


def bessel_k(nu: float, x: float, scaled: bool = False) -> float:
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt (same quadrature scheme)."""
    x = _check_arg(x)

    def f(t):
        return math.exp(-2.0 * x * math.sinh(0.5 * t) ** 2) * math.cosh(nu * t)

    val = _quad(f, _t_max(x))
    return val if scaled else val * math.exp(-x)


def log_bessel_k2(x: float) -> float:
    return math.log(bessel_k2(x, scaled=True)) - float(x)


def bessel_ratio_k1_k2(x: float) -> float:
    return bessel_k(1.0, x, scaled=True) / bessel_k2(x, scaled=True)


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w
