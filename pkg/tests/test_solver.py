from __future__ import annotations

import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subdiff.harness import manufactured_problem
from subdiff.kernels import ALIKHANOV, L1, SchemeDescriptor, build_kernels
from subdiff.mesh import graded_mesh, jittered_graded_mesh, uniform_mesh
from subdiff.solver import (
    Problem,
    SpatialGrid,
    Stepper,
    TridiagonalError,
    discrete_l2_norm,
    max_step_allowed,
    read_solution_csv,
    solve,
    thomas_solve,
)
from subdiff.special import caputo_power


def test_grid():
    g = SpatialGrid(0.0, 2.0, 4)
    assert g.h == 0.5
    np.testing.assert_array_equal(g.nodes, [0, 0.5, 1, 1.5, 2])
    np.testing.assert_array_equal(g.interior, [0.5, 1, 1.5])
    for bad in [(0, 1, 1), (1, 0, 4)]:
        with pytest.raises(ValueError):
            SpatialGrid(*bad)


def test_l2_norm_examples():
    g = SpatialGrid(0.0, 1.0, 10)
    assert discrete_l2_norm(g, np.zeros(11)) == 0.0
    v = np.ones(11)
    assert discrete_l2_norm(g, v) == pytest.approx(math.sqrt(0.9), rel=1e-15)
    assert discrete_l2_norm(g, 2 * v) == pytest.approx(2 * math.sqrt(0.9), rel=1e-15)
    with pytest.raises(ValueError):
        discrete_l2_norm(g, np.ones(10))


def test_thomas_examples():
    np.testing.assert_array_equal(thomas_solve(0.0, 1.0, 0.0, [3.0, -1.0, 2.0]), [3.0, -1.0, 2.0])
    np.testing.assert_allclose(thomas_solve([0, -1], [2, 2], [-1, 0], [1, 1]), [1, 1], rtol=1e-15)
    with pytest.raises(TridiagonalError):
        thomas_solve([0, 1], [0, 1], [1, 0], [1, 1])


@given(st.integers(0, 2**32 - 1))
def test_thomas_random_dominant(seed):
    rng = np.random.default_rng(seed)
    n = 50
    lo, up = rng.uniform(-1, 1, size=(2, n))
    d = np.abs(lo) + np.abs(up) + rng.uniform(0.1, 2, size=n)
    r = rng.normal(size=n)
    x = thomas_solve(lo, d, up, r)
    full = np.diag(d) + np.diag(lo[1:], -1) + np.diag(up[:-1], 1)
    np.testing.assert_allclose(full @ x, r, atol=1e-12)


def test_zero_problem():
    p = Problem(0.0, lambda x, t: 0.0 * x, lambda x: 0.0 * x)
    m = graded_mesh(1, 16, 2)
    for kind in (L1, ALIKHANOV):
        sol = solve(p, SpatialGrid(0, 1, 16), m, SchemeDescriptor(kind, 0.5))
        assert not np.any(sol.values)


def test_linear_in_time_is_spatial_only():
    # u = (1 + t) sin(pi x): L1 is exact in time, so the error is O(h^2)
    alpha = 0.5
    p = manufactured_problem(1.0, alpha, 0.0)
    errs = []
    for M in (16, 32, 64):
        sol = solve(p, SpatialGrid(0, 1, M), graded_mesh(1, 12, 2), SchemeDescriptor(L1, alpha))
        errs.append(sol.l2_errors(p.exact).max())
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(rates, 2.0, atol=0.05)


@pytest.mark.parametrize(
    "mesh",
    [uniform_mesh(1, 10), graded_mesh(1, 10, 3), jittered_graded_mesh(1, 10, 2, 0.25, 9)],
    ids=["uniform", "graded", "jittered"],
)
@pytest.mark.parametrize("alpha", [0.3, 0.99])
def test_l1_exact_for_linear_time(mesh, alpha):
    # Source built with the discrete eigenvalue of -Delta_h on sin(pi x), so the
    # spatial truncation vanishes; L1 is exact on t, hence U^n = t_n sin(pi x_i)
    grid = SpatialGrid(0, 1, 32)
    lam_h = 4 / grid.h**2 * math.sin(math.pi * grid.h / 2) ** 2

    def source(x, t):
        return (caputo_power(alpha, 1.0, t) + lam_h * t) * np.sin(math.pi * x)

    p = Problem(0.0, source, lambda x: 0.0 * x, lambda x, t: t * np.sin(math.pi * x))
    sol = solve(p, grid, mesh, SchemeDescriptor(L1, alpha))
    assert sol.l2_errors(p.exact).max() <= 1e-12


def test_manufactured_source_value():
    # f(1/2, 1) with sigma = alpha = 0.5, kappa = 0 is Gamma(1.5) + 2 pi^2
    # (mpmath quadrature of the Caputo integral gives 20.625435727631475)
    p = manufactured_problem(0.5, 0.5, 0.0)
    assert p.source(np.array([0.5]), 1.0)[0] == pytest.approx(20.625435727631475, rel=1e-14)
    assert np.all(np.abs(p.exact(np.array([0.0, 1.0]), 0.7)) < 1e-15)


def test_graded_order_two_minus_alpha():
    alpha = 0.5
    p = manufactured_problem(alpha, alpha, 0.0, (0.0, 10.0))
    errs = []
    Ns = (32, 64, 128)
    for N in Ns:
        sol = solve(p, SpatialGrid(0, 10, 2048), graded_mesh(1, N, (2 - alpha) / alpha), SchemeDescriptor(L1, alpha))
        errs.append(sol.l2_errors(p.exact).max())
    order = -np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    assert order == pytest.approx(2 - alpha, abs=0.1)


@pytest.mark.parametrize("kind", [L1, ALIKHANOV])
@pytest.mark.parametrize("kappa", [0.0, -3.0])
def test_maximum_principle_smoke(kind, kappa):
    p = Problem(kappa, lambda x, t: (1 + t) * x * (1 - x) * 5, lambda x: np.sin(math.pi * x) ** 2)
    sol = solve(p, SpatialGrid(0, 1, 40), graded_mesh(1, 40, 2), SchemeDescriptor(kind, 0.6))
    assert sol.values.min() >= -1e-10


def test_boundary_and_determinism():
    p = manufactured_problem(0.6, 0.6, 1.0)
    args = (p, SpatialGrid(0, 1, 20), jittered_graded_mesh(1, 30, 2, 0.2, 4), SchemeDescriptor(ALIKHANOV, 0.6))
    a, b = solve(*args), solve(*args)
    assert np.array_equal(a.values, b.values)
    assert not np.any(a.values[:, [0, -1]])


def test_stepper_order_enforced():
    p = manufactured_problem(0.6, 0.6, 0.0)
    k = build_kernels(L1, uniform_mesh(1, 4), 0.6)
    st_ = Stepper(p, SpatialGrid(0, 1, 8), k)
    st_.step(1)
    with pytest.raises(RuntimeError):
        st_.step(3)


def test_solve_rejects_mismatch_and_bad_exact():
    p = manufactured_problem(0.6, 0.6, 0.0)
    k = build_kernels(L1, uniform_mesh(1, 4), 0.6)
    with pytest.raises(ValueError):
        solve(p, SpatialGrid(0, 1, 8), uniform_mesh(1, 5), SchemeDescriptor(L1, 0.6), kernels=k)
    bad = Problem(0.0, p.source, p.initial, lambda x, t: 1 + 0 * x)
    with pytest.raises(ValueError):
        solve(bad, SpatialGrid(0, 1, 8), uniform_mesh(1, 4), SchemeDescriptor(L1, 0.6))


def test_step_restriction_warning(caplog):
    p = manufactured_problem(0.5, 0.5, 50.0)
    cap = max_step_allowed(SchemeDescriptor(L1, 0.5), 1.0, 50.0)
    assert cap < 0.25
    assert max_step_allowed(SchemeDescriptor(L1, 0.5), 1.0, 0.0) == math.inf
    with caplog.at_level(logging.WARNING, logger="subdiff.solver"):
        solve(p, SpatialGrid(0, 1, 8), uniform_mesh(1, 4), SchemeDescriptor(L1, 0.5))
    assert "stability restriction" in caplog.text


def test_csv_round_trip(tmp_path):
    p = manufactured_problem(0.4, 0.4, 0.0)
    sol = solve(p, SpatialGrid(0, 2, 10), graded_mesh(1, 8, 2), SchemeDescriptor(ALIKHANOV, 0.4))
    text = sol.to_csv(tmp_path / "s.csv")
    assert text.startswith("# {")
    for src in (tmp_path / "s.csv", text):
        back = read_solution_csv(src)
        assert np.array_equal(back.values, sol.values)
        assert back.mesh == sol.mesh and back.grid == sol.grid and back.scheme == sol.scheme
