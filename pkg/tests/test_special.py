from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import CAPUTO_REF, GAMMA_REF, ML_REF

from subdiff.special import MittagLefflerConvergenceError, caputo_power, gamma_fn, mittag_leffler, omega


@pytest.mark.parametrize("x, ref", sorted(GAMMA_REF.items()))
def test_gamma_reference(x, ref):
    assert abs(gamma_fn(x) / ref - 1.0) <= 1e-13


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_gamma_domain(x):
    with pytest.raises(ValueError):
        gamma_fn(x)


def test_omega_examples():
    assert omega(1.0, 7.3) == 1.0
    assert omega(2.0, 0.5) == 0.5
    assert omega(1.5, 1.0) == pytest.approx(1.1283791670955126, rel=1e-15)


@pytest.mark.parametrize("beta, t", [(0.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_omega_domain(beta, t):
    with pytest.raises(ValueError):
        omega(beta, t)


@pytest.mark.parametrize("beta", np.arange(0.25, 3.0, 0.25))
def test_omega_antiderivative(beta):
    t = np.linspace(0.1, 10.0, 25)
    h = 1e-6 * t
    deriv = (omega(beta + 1, t + h) - omega(beta + 1, t - h)) / (2 * h)
    np.testing.assert_allclose(deriv, omega(beta, t), rtol=1e-6)


@pytest.mark.parametrize("key, ref", sorted(ML_REF.items()))
def test_mittag_leffler_reference(key, ref):
    assert abs(mittag_leffler(*key) / ref - 1.0) <= 1e-10


def test_mittag_leffler_trivial():
    assert mittag_leffler(0.4, 0.0) == 1.0
    assert abs(mittag_leffler(1.0, 1.0) - math.e) <= 1e-12


@given(st.floats(0.3, 1.0), st.floats(0.0, 4.0), st.floats(1e-3, 1.0))
def test_mittag_leffler_increasing(alpha, z, dz):
    assert mittag_leffler(alpha, z + dz) > mittag_leffler(alpha, z)


@pytest.mark.parametrize("alpha, z", [(0.01, 1e4), (0.125, 3.0)])
def test_mittag_leffler_overflow_reported(alpha, z):
    with pytest.raises(MittagLefflerConvergenceError):
        mittag_leffler(alpha, z)


@pytest.mark.parametrize("key, ref", sorted(CAPUTO_REF.items()))
def test_caputo_power_quadrature(key, ref):
    assert abs(caputo_power(*key) / ref - 1.0) <= 1e-8


def test_caputo_power_examples():
    assert caputo_power(0.5, 1.0, 1.0) == pytest.approx(1.1283791670955126, rel=1e-14)
    # Gamma(1.5)/Gamma(1), confirmed by the quadrature table above
    assert caputo_power(0.5, 0.5, 1.0) == pytest.approx(0.886226925452758, rel=1e-14)


@given(st.floats(0.05, 0.95), st.floats(0.1, 2.5), st.floats(0.1, 5.0), st.floats(0.1, 4.0))
def test_caputo_power_homogeneous(alpha, sigma, t, lam):
    lhs = caputo_power(alpha, sigma, lam * t)
    assert lhs == pytest.approx(lam ** (sigma - alpha) * caputo_power(alpha, sigma, t), rel=1e-12)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, 1.0, 1.0), (0.5, 0.0, 1.0), (0.5, 1.0, 0.0)])
def test_caputo_power_domain(args):
    with pytest.raises(ValueError):
        caputo_power(*args)
