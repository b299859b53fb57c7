import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp

from gibbs.special import (
    bessel_k,
    bessel_k2,
    bessel_ratio_k1_k2,
    langevin,
    langevin_over_u,
    langevin_prime,
    log_bessel_k2,
    log_one_minus_exp_ratio,
    log_sinhc,
    one_minus_exp_ratio,
    thermal_excess,
)


@pytest.mark.parametrize("x", np.geomspace(1e-3, 50, 25))
def test_k2_matches_library_bessel(x):
    assert bessel_k2(x, scaled=True) == pytest.approx(sp.kve(2, x), rel=1e-10)


def test_k2_small_argument_limit():
    x = 1e-3
    assert x * x * bessel_k2(x) == pytest.approx(2.0, rel=2e-3)


def test_k2_large_argument_asymptotics():
    x = 50.0
    assert bessel_k2(x, scaled=True) * math.sqrt(2 * x / math.pi) == pytest.approx(1 + 15 / (8 * x), rel=1e-3)


@pytest.mark.parametrize("x", [0.5, 1.0, 5.0])
def test_k2_recurrence(x):
    k0, k1 = bessel_k(0.0, x), bessel_k(1.0, x)
    assert abs(bessel_k2(x) - (k0 + 2.0 / x * k1)) < 1e-9


def test_k2_does_not_overflow():
    assert math.isfinite(log_bessel_k2(700.0)) and math.isfinite(log_bessel_k2(1e4))
    assert log_bessel_k2(1e4) == pytest.approx(math.log(sp.kve(2, 1e4)) - 1e4, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, math.inf])
def test_k2_rejects_bad_argument(x):
    with pytest.raises(ValueError):
        bessel_k2(x)


def test_bessel_ratio():
    assert bessel_ratio_k1_k2(2.0) == pytest.approx(sp.kv(1, 2.0) / sp.kv(2, 2.0), rel=1e-11)


@given(st.floats(0.0, 500.0))
def test_log_sinhc(u):
    with mpmath.workdps(40):
        ref = float(mpmath.log(mpmath.sinh(u) / u)) if u > 0 else 0.0
    assert log_sinhc(u) == pytest.approx(ref, rel=1e-12, abs=1e-15)


@given(st.floats(1e-3, 300.0))
def test_langevin_is_derivative_of_log_sinhc(u):
    h = 1e-5 * u
    fd = (log_sinhc(u + h) - log_sinhc(u - h)) / (2 * h)
    assert langevin(u) == pytest.approx(fd, rel=1e-6)
    assert langevin_over_u(u) == pytest.approx(langevin(u) / u, rel=1e-12)


@given(st.floats(1e-3, 300.0))
def test_langevin_prime_by_differences(u):
    h = 1e-5 * u
    fd = (langevin(u + h) - langevin(u - h)) / (2 * h)
    assert langevin_prime(u) == pytest.approx(fd, rel=1e-5, abs=1e-12)


@pytest.mark.parametrize("u", [0.0, 1e-8, 0.04, 0.06, 19.9, 20.1])
def test_langevin_branches_agree(u):
    if u > 0:
        with mpmath.workdps(50):
            exact = float(mpmath.coth(u) - 1 / mpmath.mpf(u))
        assert langevin(u) == pytest.approx(exact, rel=1e-12)
    assert langevin_over_u(u) == pytest.approx(1 / 3 if u == 0 else langevin(u) / u, rel=1e-12)


@given(st.floats(0.0, 700.0))
def test_one_minus_exp_ratio(x):
    with mpmath.workdps(40):
        ref = 1.0 if x == 0 else float(-mpmath.expm1(-x) / x)
    assert one_minus_exp_ratio(x) == pytest.approx(ref, rel=1e-14)
    assert log_one_minus_exp_ratio(x) == pytest.approx(math.log(ref), rel=1e-12, abs=1e-15)


def test_one_minus_exp_ratio_no_cancellation():
    x = 1e-9
    assert one_minus_exp_ratio(x) == pytest.approx(1 - x / 2 + x * x / 6, rel=1e-15)


@given(st.floats(1e-9, 1e4))
def test_thermal_excess(x):
    with mpmath.workdps(60):
        ref = float(1 / mpmath.mpf(x) - 1 / mpmath.expm1(x))
    assert thermal_excess(x) == pytest.approx(ref, rel=1e-11)
