"""Fully discrete L1 / Alikhanov scheme for a 1D reaction-subdiffusion problem.

Solves ``D_t^alpha u - u_xx = kappa u + f`` on ``(x_l, x_r) x (0, T]`` with
homogeneous Dirichlet data, central differences in space and the full
convolution history in time.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from subdiff.kernels import KernelTable, SchemeDescriptor, build_kernels
from subdiff.mesh import TimeMesh

__all__ = [
    "Problem",
    "Solution",
    "SpatialGrid",
    "Stepper",
    "TridiagonalError",
    "discrete_l2_norm",
    "max_step_allowed",
    "read_solution_csv",
    "solve",
    "thomas_solve",
]

log = logging.getLogger(__name__)


class TridiagonalError(ArithmeticError):
    """Zero pivot met during tridiagonal elimination."""


@dataclass(frozen=True)
class SpatialGrid:
    x_l: float
    x_r: float
    M: int

    def __post_init__(self) -> None:
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")
        if not self.x_r > self.x_l:
            raise ValueError("need x_l < x_r")

    @property
    def h(self) -> float:
        return (self.x_r - self.x_l) / self.M

    @property
    def nodes(self) -> np.ndarray:
        return self.x_l + self.h * np.arange(self.M + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


@dataclass(frozen=True)
class Problem:
    """Data of ``D_t^alpha u - u_xx = kappa u + f``, ``u(., 0) = u0``.

    *source* and *exact* are called as ``f(x, t)`` with an array ``x`` and a
    scalar ``t``; *initial* as ``u0(x)``.
    """

    kappa: float
    source: Callable[[np.ndarray, float], np.ndarray]
    initial: Callable[[np.ndarray], np.ndarray]
    exact: Callable[[np.ndarray, float], np.ndarray] | None = None
    caputo_exact: Callable[[np.ndarray, float], np.ndarray] | None = None

    @property
    def kappa_plus(self) -> float:
        return max(self.kappa, 0.0)


@dataclass(frozen=True, eq=False)
class Solution:
    grid: SpatialGrid
    mesh: TimeMesh
    scheme: SchemeDescriptor
    values: np.ndarray = field(repr=False)  # shape (N+1, M+1)

    def l2_errors(self, exact: Callable[[np.ndarray, float], np.ndarray]) -> np.ndarray:
        """``||u(., t_n) - U^n||`` for n = 0..N."""
        x = self.grid.nodes
        return np.array(
            [discrete_l2_norm(self.grid, exact(x, t) - u) for t, u in zip(self.mesh.points, self.values)]
        )

    def to_csv(self, path: str | Path | None = None) -> str:
        """First line ``# {json metadata}``, then ``t_n, U^n_1, ..., U^n_{M-1}`` per level."""
        meta = {
            "scheme": self.scheme.kind,
            "alpha": self.scheme.alpha,
            "x_l": self.grid.x_l,
            "x_r": self.grid.x_r,
            "M": self.grid.M,
            "mesh_family": self.mesh.family,
            "mesh_gamma": self.mesh.gamma,
        }
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        for t, u in zip(self.mesh.points, self.values):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in u[1:-1])])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def read_solution_csv(source: str | Path) -> Solution:
    """Inverse of :meth:`Solution.to_csv`; accepts a path or the CSV text."""
    text = source if isinstance(source, str) and source.startswith("#") else Path(source).read_text()
    first, _, body = text.partition("\n")
    meta = json.loads(first.lstrip("#").strip())
    rows = np.array([[float(v) for v in r] for r in csv.reader(io.StringIO(body)) if r])
    grid = SpatialGrid(meta["x_l"], meta["x_r"], meta["M"])
    mesh = TimeMesh(rows[:, 0], meta["mesh_family"], meta["mesh_gamma"])
    vals = np.zeros((rows.shape[0], grid.M + 1))
    vals[:, 1:-1] = rows[:, 1:]
    return Solution(grid, mesh, SchemeDescriptor(meta["scheme"], meta["alpha"]), vals)


def discrete_l2_norm(grid: SpatialGrid, values) -> float:
    """``sqrt(h sum_{interior} v_i^2)``; *values* includes both boundary nodes."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (grid.M + 1,):
        raise ValueError(f"expected {grid.M + 1} nodal values, got shape {v.shape}")
    inner = v[1:-1]
    return math.sqrt(grid.h * float(inner @ inner))


def thomas_solve(lower, diag, upper, rhs) -> np.ndarray:
    """Tridiagonal elimination without pivoting.

    ``lower[i]`` multiplies ``x[i-1]`` and ``upper[i]`` multiplies ``x[i+1]``
    in row ``i``; ``lower[0]`` and ``upper[-1]`` are ignored. Scalars are
    broadcast, which is how the solver passes its constant off-diagonals.
    """
    d = np.broadcast_to(np.asarray(diag, dtype=np.float64), np.shape(rhs)).tolist()
    n = len(d)
    lo = np.broadcast_to(np.asarray(lower, dtype=np.float64), (n,)).tolist()
    up = np.broadcast_to(np.asarray(upper, dtype=np.float64), (n,)).tolist()
    r = np.asarray(rhs, dtype=np.float64).tolist()
    cp = [0.0] * n
    dp = [0.0] * n
    piv = d[0]
    if piv == 0.0:
        raise TridiagonalError("zero pivot in row 0")
    cp[0] = up[0] / piv
    dp[0] = r[0] / piv
    for i in range(1, n):
        piv = d[i] - lo[i] * cp[i - 1]
        if piv == 0.0:
            raise TridiagonalError(f"zero pivot in row {i}")
        cp[i] = up[i] / piv
        dp[i] = (r[i] - lo[i] * dp[i - 1]) / piv
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x)


def max_step_allowed(scheme: SchemeDescriptor, rho: float, kappa_plus: float) -> float:
    """Largest step for which the discrete Gronwall argument applies (``inf`` if ``kappa_+ = 0``)."""
    if kappa_plus <= 0:
        return math.inf
    c = 4.0 * max(1.0, rho) * scheme.pi_A * math.gamma(2.0 - scheme.alpha) * kappa_plus
    return c ** (-1.0 / scheme.alpha)


class Stepper:
    """Time-stepping state: advances one level per :meth:`step` call."""

    def __init__(self, problem: Problem, grid: SpatialGrid, kernels: KernelTable) -> None:
        self.problem = problem
        self.grid = grid
        self.kernels = kernels
        self.mesh = kernels.mesh
        N, M = self.mesh.N, grid.M
        self.values = np.zeros((N + 1, M + 1))
        u0 = np.asarray(problem.initial(grid.nodes), dtype=np.float64)
        self.values[0, 1:-1] = u0[1:-1]
        self._diff = np.zeros((N, M - 1))  # U^k - U^{k-1} on the interior
        self.level = 0

    def _apply_op(self, u: np.ndarray) -> np.ndarray:
        """``(Delta_h + kappa) u`` on the interior, zero Dirichlet data."""
        h2 = self.grid.h ** 2
        out = (-2.0 / h2 + self.problem.kappa) * u
        out[1:] += u[:-1] / h2
        out[:-1] += u[1:] / h2
        return out

    def step(self, n: int) -> np.ndarray:
        """Compute ``U^n`` from levels ``0..n-1``; *n* must be the next level."""
        if n != self.level + 1:
            raise RuntimeError(f"expected level {self.level + 1}, got {n}")
        theta = self.kernels.scheme.theta
        coef = self.kernels.coef
        h2 = self.grid.h ** 2
        u_prev = self.values[n - 1, 1:-1]
        a0 = coef[n - 1, n - 1]
        t_shift = self.mesh.points[n] - theta * self.mesh.steps[n - 1]

        rhs = a0 * u_prev + np.asarray(self.problem.source(self.grid.interior, t_shift), dtype=np.float64)
        if n > 1:
            rhs -= coef[n - 1, : n - 1] @ self._diff[: n - 1]
        if theta:
            rhs += theta * self._apply_op(u_prev)
        diag = a0 + (1.0 - theta) * (2.0 / h2 - self.problem.kappa)
        off = -(1.0 - theta) / h2
        u = thomas_solve(off, diag, off, rhs)

        self.values[n, 1:-1] = u
        self._diff[n - 1] = u - u_prev
        self.level = n
        return self.values[n]


def solve(
    problem: Problem,
    grid: SpatialGrid,
    mesh: TimeMesh,
    scheme: SchemeDescriptor,
    *,
    kernels: KernelTable | None = None,
) -> Solution:
    """March the fully discrete scheme over the whole mesh.

    The source is sampled at ``t_{n-theta}``. A violated step-size restriction
    is logged as a warning, not raised.
    """
    if kernels is None:
        kernels = build_kernels(scheme, mesh)
    elif kernels.mesh != mesh or kernels.scheme != scheme:
        raise ValueError("kernel table does not match mesh/scheme")
    if problem.exact is not None:
        for t in (0.0, mesh.T):
            ends = np.asarray(problem.exact(np.array([grid.x_l, grid.x_r]), t), dtype=np.float64)
            if np.max(np.abs(ends)) > 1e-12:
                raise ValueError("exact solution does not vanish on the boundary")
    cap = max_step_allowed(scheme, mesh.max_ratio, problem.kappa_plus)
    if mesh.max_step > cap:
        log.warning("max step %.3g exceeds the stability restriction %.3g", mesh.max_step, cap)

    st = Stepper(problem, grid, kernels)
    for n in range(1, mesh.N + 1):
        st.step(n)
    vals = st.values
    vals.setflags(write=False)
    return Solution(grid, mesh, scheme, vals)
