"""Closed-form quantities of the alpha-robust error analysis and numerical checks of its inequalities.

The manufactured temporal profile throughout is ``u(t) = 1 + t^sigma``; the
spatial factor of a separable solution only rescales every quantity here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate

from subdiff.dcc import DccTable
from subdiff.kernels import ALIKHANOV, L1, KernelTable, SchemeDescriptor, build_kernels, discrete_caputo
from subdiff.mesh import TimeMesh
from subdiff.solver import SpatialGrid
from subdiff.special import caputo_power, mittag_leffler

__all__ = [
    "ConsistencyData",
    "FactorParams",
    "Factors",
    "GlobalConsistency",
    "GronwallHypothesisError",
    "XiBound",
    "beta_gamma",
    "calibrate_cu",
    "check_dfgi",
    "check_ecs",
    "check_global_consistency",
    "dfgi_hypothesis_slack",
    "ecs_rhs",
    "factor_alikhanov",
    "factor_case",
    "factor_l1",
    "factor_values",
    "global_consistency_terms",
    "interpolation_errors",
    "interpolation_errors_alikhanov",
    "interpolation_errors_l1",
    "measure_rt",
    "stability_prefactor",
    "theorem_bound",
    "vartheta_gamma",
    "xi_bound",
    "xi_values",
]

# |sigma*gamma - target| below this (relative) counts as the equality case
EQUALITY_RTOL = 1e-12


class GronwallHypothesisError(ValueError):
    """The supplied sequences do not satisfy the Gronwall hypothesis."""

    def __init__(self, n: int, lhs: float, rhs: float) -> None:
        super().__init__(f"hypothesis fails at n = {n}: {lhs:.6g} > {rhs:.6g}")
        self.n = n
        self.lhs = lhs
        self.rhs = rhs


# ---------------------------------------------------------------- factors


@dataclass(frozen=True)
class FactorParams:
    """Parameters of the factor formulas; *n* may be a real ``n*`` on M1 meshes."""

    alpha: float
    sigma: float
    gamma: float
    n: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0 < self.sigma < 2) or self.sigma == 1:
            raise ValueError(f"sigma must lie in (0, 1) or (1, 2), got {self.sigma}")
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not self.n > 1:
            raise ValueError(f"n must exceed 1, got {self.n}")


class Factors(NamedTuple):
    varsigma: float
    zeta: float
    chi: float
    case: str  # "lt", "eq" or "gt": sigma*gamma against the scheme's target


def beta_gamma(alpha: float, sigma: float, gamma: float) -> float:
    return min(sigma * gamma, 2.0 - alpha)


def vartheta_gamma(alpha: float, sigma: float, gamma: float) -> float:
    """``min(sigma*gamma, 3 - alpha)``: the Alikhanov consistency order on graded meshes."""
    return min(sigma * gamma, 3.0 - alpha)


def factor_case(sg: float, target: float) -> str:
    if abs(sg - target) <= EQUALITY_RTOL * max(1.0, target):
        return "eq"
    return "lt" if sg < target else "gt"


def _phi(x: float, n: float) -> float:
    """``(1 - n^{-x}) / x`` for ``x >= 0``, with the limit ``ln n`` at 0."""
    ln = math.log(n)
    if x == 0.0:
        return ln
    return -math.expm1(-x * ln) / x


def _factors(p, target: float) -> Factors:
    sg = p.sigma * p.gamma
    case = factor_case(sg, target)
    ln = math.log(p.n)
    varsigma = ln if case == "eq" else _phi(abs(target - sg), p.n)
    zeta = varsigma if case == "lt" else ln
    chi = varsigma if p.sigma < 1 else zeta
    return Factors(varsigma, zeta, chi, case)


def factor_l1(params: FactorParams) -> Factors:
    """L1 factors; branches keyed on ``sigma*gamma`` against ``2 - alpha``."""
    return _factors(params, 2.0 - params.alpha)


def factor_alikhanov(params: FactorParams) -> Factors:
    """Alikhanov factors; branches keyed on ``sigma*gamma`` against ``3 - alpha``."""
    return _factors(params, 3.0 - params.alpha)


def factor_values(kind: str, alpha: float, sigma: float, gamma: float, n: float, *, validate: bool = True) -> Factors:
    """Factors for either scheme; ``validate=False`` skips the admissible-range checks.

    The unvalidated path lets table cells that no admissible sigma can reach
    still be evaluated on their formula.
    """
    target = (2.0 if kind == L1 else 3.0) - alpha
    if validate:
        return _factors(FactorParams(alpha, sigma, gamma, n), target)
    if not n > 1:
        raise ValueError(f"n must exceed 1, got {n}")
    return _factors(_RawParams(alpha, sigma, gamma, n), target)


class _RawParams(NamedTuple):
    alpha: float
    sigma: float
    gamma: float
    n: float


# ------------------------------------------------- interpolation errors


def calibrate_cu(
    sigma: float,
    *,
    T: float = 1.0,
    domain: tuple[float, float] | None = None,
) -> float:
    """Regularity constant for the family ``(1 + t^sigma) phi(x)``.

    Temporal part: ``max_l |sigma (sigma-1) ... (sigma-l+1)|`` for l = 1, 2, 3,
    which makes ``|d^l/dt^l t^sigma| <= C (1 + t^(sigma-l))``. With a *domain*
    it is scaled by ``||sin||`` in discrete L2 and compared with the
    fourth-derivative spatial bound ``(pi/L)^4 (1 + T^sigma)``.
    """
    temporal = max(abs(sigma), abs(sigma * (sigma - 1.0)), abs(sigma * (sigma - 1.0) * (sigma - 2.0)))
    if domain is None:
        return temporal
    L = domain[1] - domain[0]
    spatial = (math.pi / L) ** 4 * (1.0 + T**sigma)
    return max(temporal * math.sqrt(L / 2.0), spatial)


@dataclass(frozen=True, eq=False)
class ConsistencyData:
    """Interpolation errors, measured truncation errors and global bounds for one run.

    ``G_loc``/``G_his`` are the exact integrals, ``*_bound`` the analytic
    majorants scaled by ``C_u``. ``R_t`` and ``xi`` are filled by :func:`measure_rt`.
    """

    scheme: str
    mesh: TimeMesh
    sigma: float
    C_u: float
    G_loc: np.ndarray = field(repr=False)
    G_his: np.ndarray = field(repr=False)
    G_loc_bound: np.ndarray = field(repr=False)
    G_his_bound: np.ndarray = field(repr=False)
    R_t: np.ndarray | None = field(default=None, repr=False)
    xi: np.ndarray | None = field(default=None, repr=False)
    kernels: KernelTable | None = field(default=None, repr=False)

    def calG(self, kernels: KernelTable, *, bound: bool = False) -> np.ndarray:
        """``A^(k)_0 (G_loc^k + G_his^k)``."""
        gl, gh = (self.G_loc_bound, self.G_his_bound) if bound else (self.G_loc, self.G_his)
        return kernels.diagonal() * (gl + gh)


def _quad(f, a: float, b: float, **kw) -> float:
    val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200, **kw)
    if not np.isfinite(val):
        raise ArithmeticError(f"quadrature failed on [{a}, {b}]")
    return val


def interpolation_errors_l1(mesh: TimeMesh, alpha: float, sigma: float, C_u: float) -> ConsistencyData:
    """``G^k = int_{t_{k-1}}^{t_k} (s - t_{k-1}) |u''(s)| ds`` (local and history coincide)."""
    t, tau, N = mesh.points, mesh.steps, mesh.N
    c2 = abs(sigma * (sigma - 1.0))
    G = np.zeros(N)
    if c2 > 0:
        # first cell: the integrand c2 s^(sigma-1) is singular for sigma < 1
        G[0] = c2 * _quad(lambda s: 1.0, 0.0, tau[0], weight="alg", wvar=(sigma - 1.0, 0.0))
        for k in range(2, N + 1):
            a, b = t[k - 1], t[k]
            G[k - 1] = c2 * _quad(lambda s: (s - a) * s ** (sigma - 2.0), a, b)
    bound = np.empty(N)
    bound[0] = C_u * tau[0] ** sigma / sigma
    bound[1:] = C_u * t[1:-1] ** (sigma - 2.0) * tau[1:] ** 2
    return ConsistencyData(L1, mesh, sigma, C_u, G, G.copy(), bound, bound.copy())


def interpolation_errors_alikhanov(mesh: TimeMesh, alpha: float, sigma: float, C_u: float) -> ConsistencyData:
    """Cell errors ``tau_k^2 int_cell |u'''|`` (``int_0^{tau_1} s |u''|`` on the first cell).

    ``G_loc^k`` is the cell-k error and ``G_his^k`` adds the cell-(k+1) error,
    since the quadratic history interpolant on cell k reaches into ``t_{k+1}``.
    The step after the last is taken as ``tau_{N+1} = tau_N``.
    """
    t, tau, N = mesh.points, mesh.steps, mesh.N
    t_ext = np.append(t, t[-1] + tau[-1])
    tau_ext = np.append(tau, tau[-1])
    c2 = abs(sigma * (sigma - 1.0))
    c3 = abs(sigma * (sigma - 1.0) * (sigma - 2.0))
    cell = np.zeros(N + 1)
    if c2 > 0:
        cell[0] = c2 * _quad(lambda s: 1.0, 0.0, tau[0], weight="alg", wvar=(sigma - 1.0, 0.0))
    if c3 > 0:
        for k in range(2, N + 2):
            a, b = t_ext[k - 1], t_ext[k]
            cell[k - 1] = tau_ext[k - 1] ** 2 * c3 * _quad(lambda s: s ** (sigma - 3.0), a, b)
    G_loc = cell[:N].copy()
    G_his = cell[:N] + cell[1:]

    loc_b = np.empty(N)
    loc_b[0] = C_u * tau[0] ** sigma / sigma
    loc_b[1:] = C_u * t[1:-1] ** (sigma - 3.0) * tau[1:] ** 3
    tail = C_u * t_ext[1 : N + 1] ** (sigma - 3.0) * tau_ext[1 : N + 1] ** 3
    his_b = loc_b + tail
    return ConsistencyData(ALIKHANOV, mesh, sigma, C_u, G_loc, G_his, loc_b, his_b)


def interpolation_errors(kind: str, mesh: TimeMesh, alpha: float, sigma: float, C_u: float) -> ConsistencyData:
    if kind == L1:
        return interpolation_errors_l1(mesh, alpha, sigma, C_u)
    return interpolation_errors_alikhanov(mesh, alpha, sigma, C_u)


# ------------------------------------------------------ global bounds


def xi_values(kernels: KernelTable, calG: np.ndarray) -> np.ndarray:
    """``Xi^n = Gamma(2-a) pi_A (sum_{j>=2} tau_j max_{j<=k<=n} t_k^(a-1) calG^k + tau_1^a calG^1)`` for all n."""
    sch = kernels.scheme
    a = sch.alpha
    t = kernels.mesh.points[1:]
    tau = kernels.mesh.steps
    w = t ** (a - 1.0) * calG
    out = np.empty(kernels.N)
    head = tau[0] ** a * calG[0]
    for n in range(1, kernels.N + 1):
        if n == 1:
            s = 0.0
        else:
            suffix = np.maximum.accumulate(w[1:n][::-1])[::-1]
            s = float(tau[1:n] @ suffix)
        out[n - 1] = s + head
    return math.gamma(2.0 - a) * sch.pi_A * out


class XiBound(NamedTuple):
    generic: float
    specialized: float | None
    form: str | None


def _specialized_xi(kind: str, mesh: TimeMesh, alpha: float, sigma: float, C_u: float, n: int, gamma: float | None):
    """Mesh-specialized shapes of the global consistency bound (unit mesh constants)."""
    if n < 2:
        return None, None
    t_n = float(mesh.points[n])
    tau = mesh.max_step
    fam = mesh.family
    if fam == "uniform" or (fam == "graded" and mesh.gamma == 1.0):
        p = FactorParams(alpha, sigma, 1.0, n)
        if kind == L1:
            b1 = beta_gamma(alpha, sigma, 1.0)
            vs = factor_l1(p).varsigma
            return C_u * ((1.0 / sigma + 1.0) * tau**sigma + vs * t_n ** (sigma - b1) * tau**b1), "uniform"
        th = vartheta_gamma(alpha, sigma, 1.0)
        vs = factor_alikhanov(p).varsigma
        return C_u * (1.0 / sigma + t_n ** (sigma - th) * vs) * tau**th, "uniform"
    if fam == "graded":
        g = float(mesh.gamma)
        p = FactorParams(alpha, sigma, g, n)
        N = mesh.N
        if kind == L1:
            chi = factor_l1(p).chi
            return C_u * mesh.T**sigma * (1.0 / sigma + chi) * N ** (-beta_gamma(alpha, sigma, g)), "graded"
        chi = factor_alikhanov(p).chi
        return C_u * (1.0 / sigma + chi) * N ** (-vartheta_gamma(alpha, sigma, g)), "graded"
    g = gamma if gamma is not None else mesh.gamma
    if g is None:
        return None, None
    nstar = mesh.n_star(n, g)
    if nstar <= 1:
        return None, None
    p = FactorParams(alpha, sigma, g, nstar)
    if kind == L1:
        chi = factor_l1(p).chi
        return C_u * (1.0 / sigma + chi) * tau ** beta_gamma(alpha, sigma, g), "M1"
    vs = factor_alikhanov(p).varsigma
    return C_u * (1.0 / sigma + vs) * tau ** vartheta_gamma(alpha, sigma, g), "M1"


def xi_bound(
    scheme: SchemeDescriptor | str,
    mesh: TimeMesh,
    alpha: float,
    sigma: float,
    C_u: float,
    n: int,
    *,
    use_bounds: bool = False,
    gamma: float | None = None,
) -> XiBound:
    """Generic ``Xi^n`` plus the mesh-specialized shape when the family has one.

    The generic value is built from the exact interpolation errors, or from
    their ``C_u`` majorants with *use_bounds*.
    """
    kind = scheme.kind if isinstance(scheme, SchemeDescriptor) else scheme
    if not 1 <= n <= mesh.N:
        raise IndexError(f"level {n} outside 1..{mesh.N}")
    kernels = build_kernels(kind, mesh, alpha)
    data = interpolation_errors(kind, mesh, alpha, sigma, C_u)
    generic = float(xi_values(kernels, data.calG(kernels, bound=use_bounds))[n - 1])
    special, form = _specialized_xi(kind, mesh, alpha, sigma, C_u, n, gamma)
    return XiBound(generic, special, form)


def measure_rt(
    scheme: SchemeDescriptor | str,
    mesh: TimeMesh,
    alpha: float,
    sigma: float,
    *,
    C_u: float | None = None,
    kernels: KernelTable | None = None,
) -> ConsistencyData:
    """Truncation errors ``R_t^j`` of ``u = 1 + t^sigma`` at ``t_{j-theta}``, with G values and ``Xi^n``."""
    kind = scheme.kind if isinstance(scheme, SchemeDescriptor) else scheme
    if kernels is None:
        kernels = build_kernels(kind, mesh, alpha)
    theta = kernels.scheme.theta
    t = mesh.points
    u = 1.0 + t**sigma
    exact = caputo_power(alpha, sigma, t[1:] - theta * mesh.steps)
    rt = np.asarray(exact) - discrete_caputo(kernels, u)
    cu = calibrate_cu(sigma) if C_u is None else C_u
    data = interpolation_errors(kind, mesh, alpha, sigma, cu)
    xi = xi_values(kernels, data.calG(kernels))
    return ConsistencyData(
        kind, mesh, sigma, cu, data.G_loc, data.G_his, data.G_loc_bound, data.G_his_bound, rt, xi, kernels
    )


def ecs_rhs(kernels: KernelTable, G_loc: np.ndarray, G_his: np.ndarray) -> np.ndarray:
    """``A^(k)_0 G_loc^k + sum_{j<k} (A^(k)_{k-j-1} - A^(k)_{k-j}) G_his^j`` for all k."""
    coef = kernels.coef
    W = np.zeros_like(coef)
    W[:, :-1] = coef[:, 1:] - coef[:, :-1]
    W = np.tril(W, -1)
    return kernels.diagonal() * G_loc + W @ G_his


def check_ecs(data: ConsistencyData, kernels: KernelTable | None = None) -> np.ndarray:
    """Relative ECS margins ``(rhs_k - |R_t^k|) / rhs_k``; negative entries are violations.

    Levels where both sides are at rounding level (``sigma = 1`` for L1, where
    the right side is exactly zero) report a margin of 0; the floor is
    ``1e-12 A^(k)_0``, the size of rounding in a discrete Caputo value of O(1) data.
    """
    kernels = kernels or data.kernels
    if data.R_t is None or kernels is None:
        raise ValueError("ECS check needs measured R_t and the kernel table")
    rhs = ecs_rhs(kernels, data.G_loc, data.G_his)
    lhs = np.abs(data.R_t)
    scale = np.maximum(rhs, lhs)
    tiny = scale <= 1e-12 * kernels.diagonal()
    out = np.zeros_like(rhs)
    out[~tiny] = (rhs[~tiny] - lhs[~tiny]) / scale[~tiny]
    return out


class GlobalConsistency(NamedTuple):
    lhs: np.ndarray  # sum_j P |R_t^j|
    mid: np.ndarray  # sum_j P calG^j
    rhs: np.ndarray  # (1 + rho) Xi^n
    margin: float


def global_consistency_terms(dcc: DccTable, data: ConsistencyData) -> GlobalConsistency:
    """Every link of ``sum P|R_t| <= sum P calG <= (1+rho) Xi`` for all n."""
    if data.R_t is None:
        raise ValueError("global consistency needs measured R_t")
    kernels = dcc.kernels
    calG = data.calG(kernels)
    xi = data.xi if data.xi is not None else xi_values(kernels, calG)
    rho = kernels.mesh.max_ratio
    lhs = dcc.mat @ np.abs(data.R_t)
    mid = dcc.mat @ calG
    rhs = (1.0 + rho) * xi
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(rhs > 0, (rhs - lhs) / rhs, np.where(lhs > 0, -np.inf, 0.0))
    return GlobalConsistency(lhs, mid, rhs, float(rel.min()))


def check_global_consistency(dcc: DccTable, data: ConsistencyData) -> float:
    """Worst relative margin of ``sum_j P^(n)_{n-j} |R_t^j| <= (1 + rho) Xi^n`` over n."""
    return global_consistency_terms(dcc, data).margin


# ------------------------------------------------------------ Gronwall


def _theta_avg(v: np.ndarray, theta: float) -> np.ndarray:
    return theta * v[:-1] + (1.0 - theta) * v[1:]


def dfgi_hypothesis_slack(kernels: KernelTable, v, g, lambdas) -> np.ndarray:
    """``rhs_n - lhs_n`` of the Gronwall hypothesis for n = 1..N."""
    v = np.asarray(v, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    lam = np.asarray(lambdas, dtype=np.float64)
    N = kernels.N
    if v.size != N + 1 or g.size != N or lam.size != N:
        raise ValueError("need v^0..v^N, g^1..g^N and lambda_0..lambda_{N-1}")
    if np.any(v < 0) or np.any(g < 0) or np.any(lam < 0):
        raise ValueError("sequences must be nonnegative")
    vt = _theta_avg(v, kernels.scheme.theta)
    lhs = kernels.coef @ np.diff(v**2)
    # sum_{k=1}^n lambda_{n-k} (v^{k-theta})^2 is a causal convolution
    conv = np.convolve(lam, vt**2)[:N]
    return conv + vt * g - lhs


def stability_prefactor(scheme: SchemeDescriptor, rho: float, Lambda: float, t: float) -> float:
    """``E_alpha(2 max(1, rho) pi_A Lambda t^alpha)``."""
    return mittag_leffler(scheme.alpha, 2.0 * max(1.0, rho) * scheme.pi_A * Lambda * t**scheme.alpha)


def check_dfgi(
    kernels: KernelTable,
    dcc: DccTable,
    v,
    g,
    lambdas,
    Lambda: float,
    *,
    rtol: float = 1e-12,
) -> bool:
    """Check the Gronwall conclusion on sequences that satisfy its hypothesis.

    Raises :class:`GronwallHypothesisError` if the hypothesis fails (checked,
    not assumed) and ``ValueError`` if ``Lambda`` or the step restriction is
    not met. Returns whether
    ``v^n <= E_a(2 max(1,rho) pi_A Lambda t_n^a)(v^0 + max_k sum_j P^(k)_{k-j} g^j)``
    holds at every n.
    """
    v = np.asarray(v, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    lam = np.asarray(lambdas, dtype=np.float64)
    slack = dfgi_hypothesis_slack(kernels, v, g, lam)
    vt = _theta_avg(v, kernels.scheme.theta)
    lhs = kernels.coef @ np.diff(v**2)
    scale = np.maximum.reduce([np.abs(lhs), np.convolve(lam, vt**2)[: kernels.N] + vt * g, np.full_like(lhs, 1e-300)])
    bad = np.flatnonzero(slack < -rtol * scale)
    if bad.size:
        n = int(bad[0])
        raise GronwallHypothesisError(n + 1, float(lhs[n]), float(lhs[n] + slack[n]))
    if Lambda < lam.sum() * (1.0 - 1e-14):
        raise ValueError(f"Lambda = {Lambda} is below sum(lambda) = {lam.sum()}")
    sch = kernels.scheme
    mesh = kernels.mesh
    rho = mesh.max_ratio
    if Lambda > 0:
        cap = (2.0 * max(1.0, rho) * sch.pi_A * math.gamma(2.0 - sch.alpha) * Lambda) ** (-1.0 / sch.alpha)
        if mesh.max_step > cap:
            raise ValueError(f"max step {mesh.max_step:.3g} exceeds the restriction {cap:.3g}")
    forcing = np.maximum.accumulate(dcc.mat @ g)
    for n in range(1, kernels.N + 1):
        bound = stability_prefactor(sch, rho, Lambda, mesh.points[n]) * (v[0] + forcing[n - 1])
        if v[n] > bound * (1.0 + rtol) + 1e-300:
            return False
    return True


# ------------------------------------------------------- theorem bounds


def _suffix_sum(tau: np.ndarray, w: np.ndarray, n: int) -> float:
    """``sum_{j=2}^n tau_j max_{j<=k<=n} w_k`` with 1-based k (w[k-1] = w_k)."""
    if n < 2:
        return 0.0
    suffix = np.maximum.accumulate(w[1:n][::-1])[::-1]
    return float(tau[1:n] @ suffix)


def theorem_bound(
    scheme: SchemeDescriptor | str,
    mesh: TimeMesh,
    grid: SpatialGrid | None,
    alpha: float,
    sigma: float,
    kappa: float,
    C_u: float,
    n: int,
    *,
    e0: float = 0.0,
) -> float:
    """Right-hand side of the L2 error theorem for the chosen scheme at level n.

    L1::

        C_u (rho+1) E_a(4 max(1,rho) k+ t_n^a) (|e0| + tau_1^s/s
            + sum_j tau_j max_k t_{k-1}^{s-2} t_k^{a-1} tau_k^{2-a} + t_n^a h^2)

    Alikhanov::

        C_u E_a(20 k+ t_n^a) (|e0| + tau_1^s/s + t_n^a max_k t_{k-1}^{s-2} tau_k^2 + t_n^a h^2
            + sum_j tau_j max_k (t_{k-1}^{s-3} t_k^{a-1} tau_k^{3-a} + t_k^{s+a-4} tau_{k+1}^3 / tau_k^a))

    with ``tau_{N+1} = tau_N``. ``n = 0`` gives ``C_u |e0|`` times the prefactor.
    """
    kind = scheme.kind if isinstance(scheme, SchemeDescriptor) else scheme
    if not 0 <= n <= mesh.N:
        raise IndexError(f"level {n} outside 0..{mesh.N}")
    kp = max(kappa, 0.0)
    rho = mesh.max_ratio
    t, tau = mesh.points, mesh.steps
    t_n = float(t[n])
    h2 = grid.h**2 if grid is not None else 0.0
    if kind == L1:
        pref = (rho + 1.0) * mittag_leffler(alpha, 4.0 * max(1.0, rho) * kp * t_n**alpha)
    else:
        pref = mittag_leffler(alpha, 20.0 * kp * t_n**alpha)
    if n == 0:
        return C_u * pref * abs(e0)

    total = abs(e0) + tau[0] ** sigma / sigma + t_n**alpha * h2
    if n >= 2:
        k = np.arange(2, n + 1)
        tkm1, tk, tauk = t[k - 1], t[k], tau[k - 1]
        w = np.zeros(n)
        if kind == L1:
            w[1:] = tkm1 ** (sigma - 2.0) * tk ** (alpha - 1.0) * tauk ** (2.0 - alpha)
        else:
            tau_next = np.append(tau, tau[-1])[k]
            w[1:] = (
                tkm1 ** (sigma - 3.0) * tk ** (alpha - 1.0) * tauk ** (3.0 - alpha)
                + tk ** (sigma + alpha - 4.0) * tau_next**3 / tauk**alpha
            )
            total += t_n**alpha * float(np.max(tkm1 ** (sigma - 2.0) * tauk**2))
        total += _suffix_sum(tau, w, n)
    return C_u * pref * total
