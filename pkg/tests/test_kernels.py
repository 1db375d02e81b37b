from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import ALIK_GRADED4

from subdiff.kernels import (
    ALIKHANOV,
    L1,
    KernelError,
    MeshRatioError,
    SchemeDescriptor,
    alikhanov_kernels,
    apply_discrete_caputo,
    build_kernels,
    check_A1,
    check_A2,
    check_mvt,
    discrete_caputo,
    l1_kernels,
    lemma21_quantities,
    power_diff,
)
from subdiff.mesh import TimeMesh, graded_mesh, jittered_graded_mesh, uniform_mesh
from subdiff.special import caputo_power, omega

G15 = math.gamma(1.5)


def meshes():
    return [
        uniform_mesh(1.0, 24),
        graded_mesh(1.0, 24, 2.0),
        graded_mesh(2.0, 24, 3.0),
        jittered_graded_mesh(1.0, 24, 2.0, 0.2, 3),
    ]


def test_scheme_descriptor():
    l1 = SchemeDescriptor(L1, 0.4)
    al = SchemeDescriptor(ALIKHANOV, 0.4)
    assert (l1.theta, l1.pi_A, l1.rho_cap) == (0.0, 1.0, math.inf)
    assert (al.theta, al.pi_A, al.rho_cap) == (0.2, 11 / 4, 7 / 4)
    for bad in [(L1, 0.0), (L1, 1.0), ("L2", 0.5)]:
        with pytest.raises(ValueError):
            SchemeDescriptor(*bad)


def test_l1_examples():
    k = l1_kernels(uniform_mesh(2.0, 2), 0.5)
    assert k.A(1, 0) == pytest.approx(1 / G15, rel=1e-14)
    assert k.A(2, 1) == pytest.approx(0.46738995451021814, rel=1e-14)


@pytest.mark.parametrize("alpha", [0.2, 0.7, 0.99])
def test_l1_diagonal(alpha):
    m = graded_mesh(1.0, 30, 2.5)
    np.testing.assert_allclose(l1_kernels(m, alpha).diagonal(), m.steps ** (-alpha) / math.gamma(2 - alpha), rtol=1e-13)


def test_alikhanov_examples():
    k = alikhanov_kernels(uniform_mesh(1.0, 1), 0.5)
    assert k.A(1, 0) == pytest.approx(0.97720502380583984, rel=1e-14)
    k = alikhanov_kernels(graded_mesh(1.0, 4, 2.0), 0.6)
    for n, ref in enumerate(ALIK_GRADED4, start=1):
        np.testing.assert_allclose(k.row(n), ref, rtol=1e-13)


@pytest.mark.parametrize("mesh", meshes(), ids=lambda m: m.family)
@pytest.mark.parametrize("alpha", [0.3, 0.9])
def test_alikhanov_a0_upper_bound(mesh, alpha):
    k = alikhanov_kernels(mesh, alpha)
    assert np.all(k.diagonal() <= 24 / 11 * mesh.steps ** (-alpha) / math.gamma(2 - alpha))


def test_alikhanov_ratio_error():
    bad = TimeMesh(np.array([0.0, 0.5, 0.7, 1.0]))
    with pytest.raises(MeshRatioError):
        alikhanov_kernels(bad, 0.5)
    alikhanov_kernels(bad, 0.5, check_ratio=False)


def test_power_diff_cancellation():
    x = np.array([1e3, 1.0, 5.0])
    d = np.array([1e-9, 1.0, 2.0])
    p = 1e-3
    ref = [1e3**p * -math.expm1(p * math.log1p(-1e-12)), 1.0, 5.0**p - 3.0**p]
    np.testing.assert_allclose(power_diff(x, d, p), ref, rtol=1e-12)


def _quad_l1(mesh, alpha, n, k):
    t = mesh.points
    f = lambda s: (t[n] - s) ** (-alpha) / math.gamma(1 - alpha)
    opts = dict(weight="alg", wvar=(0.0, -alpha)) if k == n else {}
    val = quad(f if k < n else (lambda s: 1 / math.gamma(1 - alpha)), t[k - 1], t[k], epsabs=0, epsrel=1e-13, limit=200, **opts)[0]
    return val / mesh.steps[k - 1]


def _quad_alik(mesh, alpha, n, k):
    """(a, b) of the Alikhanov kernels by adaptive quadrature."""
    t, tau = mesh.points, mesh.steps
    th = alpha / 2
    tn = t[n] - th * tau[n - 1]
    c = 1 / math.gamma(1 - alpha)
    if k == n:
        a = quad(lambda s: c, t[n - 1], tn, weight="alg", wvar=(0.0, -alpha), epsabs=0, epsrel=1e-13)[0] / tau[k - 1]
        return a, 0.0
    mid = 0.5 * (t[k - 1] + t[k])
    a = quad(lambda s: c * (tn - s) ** (-alpha), t[k - 1], t[k], epsabs=0, epsrel=1e-13, limit=200)[0] / tau[k - 1]
    b = quad(lambda s: c * (s - mid) * (tn - s) ** (-alpha), t[k - 1], t[k], epsabs=0, epsrel=1e-13, limit=200)[0]
    return a, 2 * b / (tau[k - 1] * (tau[k - 1] + tau[k]))


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("alpha", [0.3, 0.9, 0.99])
@pytest.mark.parametrize("mesh", meshes(), ids=lambda m: m.family)
def test_kernels_match_quadrature(mesh, alpha):
    l1 = l1_kernels(mesh, alpha)
    al = alikhanov_kernels(mesh, alpha)
    for n, k in [(1, 1), (5, 5), (5, 1), (9, 4), (24, 1), (24, 12), (24, 23), (24, 24)]:
        assert l1.coef[n - 1, k - 1] == pytest.approx(_quad_l1(mesh, alpha, n, k), rel=1e-10)
        a, b = _quad_alik(mesh, alpha, n, k)
        assert al.a[n - 1, k - 1] == pytest.approx(a, rel=1e-10)
        # b is a first moment: compare on the scale of a * tau to avoid a 0/0 in the relative error
        assert abs(al.b[n - 1, k - 1] - b) <= 1e-10 * max(abs(b), 1e-3 * a * mesh.steps[k - 1])


def test_b_moment_zero_for_constant_weight():
    # int (s - t_{k-1/2}) ds over a symmetric cell vanishes
    for lo, hi in [(0.0, 1.0), (0.3, 0.75)]:
        mid = 0.5 * (lo + hi)
        assert abs(quad(lambda s: s - mid, lo, hi)[0]) < 1e-15


def test_apply_discrete_caputo_examples():
    m = uniform_mesh(3.0, 3)
    k = l1_kernels(m, 0.5)
    assert apply_discrete_caputo(k, [4.0, 4.0, 4.0, 4.0]) == 0.0
    assert apply_discrete_caputo(k, m.points[:2]) == pytest.approx(caputo_power(0.5, 1.0, 1.0), rel=1e-14)
    with pytest.raises(ValueError):
        apply_discrete_caputo(k, np.zeros(6))


@pytest.mark.parametrize("mesh", meshes(), ids=lambda m: m.family)
@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.999])
def test_l1_exact_on_linears(mesh, alpha):
    k = l1_kernels(mesh, alpha)
    got = discrete_caputo(k, mesh.points)
    np.testing.assert_allclose(got, caputo_power(alpha, 1.0, mesh.points[1:]), rtol=1e-12)


@pytest.mark.parametrize("mesh", meshes(), ids=lambda m: m.family)
def test_l1_on_omega(mesh):
    # D^a omega_{1+a} = 1; omega_{1+a} is concave, so the piecewise-linear
    # interpolant undershoots its increments and the discrete value exceeds 1,
    # by at most the first-cell excess and shrinking away from t = 0
    alpha = 0.6
    k = l1_kernels(mesh, alpha)
    got = discrete_caputo(k, np.concatenate(([0.0], omega(1 + alpha, mesh.points[1:]))))
    first = k.A(1, 0) * omega(1 + alpha, mesh.points[1])
    assert got[0] == pytest.approx(first)
    assert np.all(got >= 1 - 1e-12) and np.all(got <= first + 1e-12)
    assert got[-1] - 1 < 0.01


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_discrete_caputo_linear(seed, c1, c2):
    rng = np.random.default_rng(seed)
    k = alikhanov_kernels(graded_mesh(1.0, 16, 2.0), 0.7)
    u, v = rng.normal(size=(2, 17))
    lhs = apply_discrete_caputo(k, c1 * u + c2 * v)
    rhs = c1 * apply_discrete_caputo(k, u) + c2 * apply_discrete_caputo(k, v)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("mesh", meshes(), ids=lambda m: m.family)
@pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9, 0.99])
def test_assumptions(mesh, alpha):
    l1 = l1_kernels(mesh, alpha)
    al = alikhanov_kernels(mesh, alpha)
    assert check_A1(l1) == (True, None)
    assert check_A1(al) == (True, None)
    assert abs(check_A2(l1)) <= 1e-12
    assert check_A2(al) >= -1e-12
    ok, gap = check_mvt(l1)
    assert ok and gap > 0


def test_check_A2_named_configs():
    assert check_A2(alikhanov_kernels(uniform_mesh(1, 32), 0.5)) >= 0
    assert check_A2(alikhanov_kernels(graded_mesh(1, 64, 3), 0.9)) >= 0


def test_check_A1_reports_beyond_cap():
    # ratio-8 mesh: beyond the 7/4 cap; report whatever happens without asserting
    pts = np.array([0.0, 0.8, 0.9, 1.0])
    ok, where = check_A1(alikhanov_kernels(TimeMesh(pts), 0.5, check_ratio=False))
    assert ok or (where is not None and 1 <= where[0] <= 3)


def test_check_A1_detects_bad_row():
    k = l1_kernels(uniform_mesh(1, 4), 0.5)
    coef = k.coef.copy()
    coef[3, 0] = 2 * coef[3, 1]
    bad = type(k)(k.scheme, k.mesh, coef)
    assert check_A1(bad) == (False, (4, 3))


def test_lemma21():
    k = alikhanov_kernels(uniform_mesh(1, 16), 0.5)
    for n in range(2, 17):
        d, th = lemma21_quantities(k, n)
        a0, a1 = k.A(n, 0), k.A(n, 1)
        assert d == pytest.approx((2 * a0 - a1) / (a0 * (a0 - a1)))
        assert d > 0
        assert 0.25 < th < 0.5
    with pytest.raises(ValueError):
        lemma21_quantities(k, 1)


def test_lemma21_limits():
    k = l1_kernels(uniform_mesh(1, 4), 0.5)
    coef = k.coef.copy()
    coef[1, 0] = 1e-12
    _, th = lemma21_quantities(type(k)(k.scheme, k.mesh, coef), 2)
    assert th == pytest.approx(0.5, abs=1e-9)
    coef[1, 0] = coef[1, 1]
    with pytest.raises(KernelError):
        lemma21_quantities(type(k)(k.scheme, k.mesh, coef), 2)


def test_build_kernels_dispatch(tmp_path):
    m = graded_mesh(1, 8, 2)
    assert build_kernels(L1, m, 0.4).scheme == SchemeDescriptor(L1, 0.4)
    assert build_kernels(SchemeDescriptor(ALIKHANOV, 0.4), m).scheme.kind == ALIKHANOV
    with pytest.raises(TypeError):
        build_kernels(L1, m)
    k = build_kernels(L1, m, 0.4)
    k.to_csv(tmp_path / "k.csv")
    rows = (tmp_path / "k.csv").read_text().splitlines()
    assert len(rows) == 8
    np.testing.assert_array_equal([float(v) for v in rows[-1].split(",")[1:]], k.row(8))
