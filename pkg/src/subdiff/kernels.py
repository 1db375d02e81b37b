"""Discrete Caputo convolution kernels for the L1 and Alikhanov formulas.

A :class:`KernelTable` stores the lower-triangular matrix ``coef`` with

    coef[n-1, k-1] = A^(n)_{n-k},    1 <= k <= n <= N,

so the discrete Caputo derivative at every level is ``coef @ diff(v)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from subdiff.mesh import TimeMesh, check_A3

__all__ = [
    "ALIKHANOV",
    "L1",
    "KernelError",
    "KernelTable",
    "MeshRatioError",
    "SchemeDescriptor",
    "alikhanov_kernels",
    "apply_discrete_caputo",
    "build_kernels",
    "check_A1",
    "check_A2",
    "check_mvt",
    "discrete_caputo",
    "l1_kernels",
    "lemma21_quantities",
    "power_diff",
]

L1 = "L1"
ALIKHANOV = "Alikhanov"

# below this half-step / midpoint-distance ratio the b-moment uses its series
_SERIES_MAX_RATIO = 0.5
_SERIES_TERMS = 31


class KernelError(ValueError):
    pass


class MeshRatioError(KernelError):
    """The mesh violates the step-ratio cap a scheme relies on."""


@dataclass(frozen=True)
class SchemeDescriptor:
    """Scheme kind plus the constants its analysis depends on."""

    kind: str
    alpha: float

    def __post_init__(self) -> None:
        if self.kind not in (L1, ALIKHANOV):
            raise ValueError(f"unknown scheme {self.kind!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def theta(self) -> float:
        return 0.0 if self.kind == L1 else self.alpha / 2.0

    @property
    def pi_A(self) -> float:
        return 1.0 if self.kind == L1 else 11.0 / 4.0

    @property
    def rho_cap(self) -> float:
        return math.inf if self.kind == L1 else 7.0 / 4.0


@dataclass(frozen=True, eq=False)
class KernelTable:
    scheme: SchemeDescriptor
    mesh: TimeMesh
    coef: np.ndarray = field(repr=False)
    a: np.ndarray | None = field(default=None, repr=False)
    b: np.ndarray | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.mesh.N

    @property
    def alpha(self) -> float:
        return self.scheme.alpha

    def row(self, n: int) -> np.ndarray:
        """``[A^(n)_0, ..., A^(n)_{n-1}]``."""
        if not 1 <= n <= self.N:
            raise IndexError(f"level {n} outside 1..{self.N}")
        return self.coef[n - 1, :n][::-1].copy()

    def A(self, n: int, j: int) -> float:
        """Single entry ``A^(n)_j``."""
        if not 0 <= j < n:
            raise IndexError(f"A^({n})_{j} is not defined")
        return float(self.coef[n - 1, n - 1 - j])

    def diagonal(self) -> np.ndarray:
        """``A^(n)_0`` for n = 1..N."""
        return np.diagonal(self.coef).copy()

    def to_csv(self, path: str | Path) -> None:
        """One line per level n: ``n, A^(n)_0, ..., A^(n)_{n-1}``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for n in range(1, self.N + 1):
                w.writerow([n, *(repr(float(v)) for v in self.row(n))])


def power_diff(x, d, p: float):
    """``x**p - (x - d)**p`` for ``0 < d <= x`` without cancellation.

    Written as ``x**p * (-expm1(p * log1p(-d/x)))``, which stays accurate when
    ``d << x`` and ``p`` is small (alpha close to one).
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    r = np.minimum(d / x, 1.0)
    out = np.empty(np.broadcast(x, d).shape)
    full = r >= 1.0
    out[full] = np.broadcast_to(x, out.shape)[full] ** p
    part = ~full
    xp = np.broadcast_to(x, out.shape)[part]
    out[part] = xp**p * -np.expm1(p * np.log1p(-r[part]))
    return out


def _lower_indices(N: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.tril_indices(N)
    return i + 1, j + 1  # levels n, cells k


def _l1_matrix(mesh: TimeMesh, alpha: float) -> np.ndarray:
    """Step averages ``(1/tau_k) int_{t_{k-1}}^{t_k} omega_{1-alpha}(t_n - s) ds``."""
    t, tau, N = mesh.points, mesh.steps, mesh.N
    n, k = _lower_indices(N)
    out = np.zeros((N, N))
    dk = tau[k - 1]
    out[n - 1, k - 1] = power_diff(t[n] - t[k - 1], dk, 1.0 - alpha) / (dk * math.gamma(2.0 - alpha))
    return out


def l1_kernels(mesh: TimeMesh, alpha: float) -> KernelTable:
    """L1 kernels ``A^(n)_{n-k} = [(t_n - t_{k-1})^{1-a} - (t_n - t_k)^{1-a}] / (tau_k Gamma(2-a))``."""
    scheme = SchemeDescriptor(L1, alpha)
    coef = _l1_matrix(mesh, alpha)
    coef.setflags(write=False)
    return KernelTable(scheme, mesh, coef)


def _binom_neg_alpha(alpha: float, jmax: int) -> np.ndarray:
    c = np.empty(jmax + 1)
    c[0] = 1.0
    for j in range(1, jmax + 1):
        c[j] = c[j - 1] * (-alpha - j + 1.0) / j
    return c


def _first_moment(x: np.ndarray, d: np.ndarray, alpha: float) -> np.ndarray:
    r"""``\int_{x-d}^{x} (m - y) omega_{1-alpha}(y) dy`` with ``m = x - d/2``.

    This is the integral in the b-coefficients after substituting
    ``y = t_{n-theta} - s``. Far from the singularity it is a tiny difference of
    O(1) terms, so there the odd-power binomial series in ``h/m`` is used.
    """
    h = 0.5 * d
    m = x - h
    ratio = h / m
    out = np.empty_like(x)
    g2 = math.gamma(2.0 - alpha)

    closed = ratio > _SERIES_MAX_RATIO
    if np.any(closed):
        xc, dc, mc = x[closed], d[closed], m[closed]
        out[closed] = (
            mc * power_diff(xc, dc, 1.0 - alpha) / g2
            - (1.0 - alpha) * power_diff(xc, dc, 2.0 - alpha) / math.gamma(3.0 - alpha)
        )
    ser = ~closed
    if np.any(ser):
        c = _binom_neg_alpha(alpha, 2 * _SERIES_TERMS)
        rs = ratio[ser]
        r2 = rs * rs
        acc = np.zeros_like(rs)
        # Horner over odd powers j = 1, 3, ..., from the top
        for j in range(2 * _SERIES_TERMS - 1, 0, -2):
            acc = acc * r2 + (-c[j]) / (j + 2.0)
        acc *= rs
        out[ser] = 2.0 * (1.0 - alpha) / g2 * m[ser] ** (-alpha) * h[ser] ** 2 * acc
    return out


def alikhanov_kernels(mesh: TimeMesh, alpha: float, *, check_ratio: bool = True) -> KernelTable:
    """Alikhanov kernels assembled from the a- and b-coefficients at ``t_{n-theta}``, ``theta = alpha/2``.

    Raises :class:`MeshRatioError` if some ``tau_k / tau_{k+1} > 7/4``, unless
    *check_ratio* is false (useful for probing what breaks beyond the cap).
    """
    scheme = SchemeDescriptor(ALIKHANOV, alpha)
    if check_ratio:
        ok, bad = check_A3(mesh, scheme.rho_cap)
        if not ok:
            raise MeshRatioError(
                f"step ratios exceed 7/4 at k = {bad[:10].tolist()}{' ...' if bad.size > 10 else ''}"
            )
    theta = scheme.theta
    t, tau, N = mesh.points, mesh.steps, mesh.N
    g2 = math.gamma(2.0 - alpha)
    t_shift = t[1:] - theta * tau  # t_{n-theta}, n = 1..N

    a = np.zeros((N, N))
    b = np.zeros((N, N))
    diag = np.arange(N)
    a[diag, diag] = ((1.0 - theta) * tau) ** (1.0 - alpha) / (tau * g2)

    n, k = _lower_indices(N)
    hist = k < n
    n, k = n[hist], k[hist]
    if n.size:
        x = t_shift[n - 1] - t[k - 1]
        dk = tau[k - 1]
        a[n - 1, k - 1] = power_diff(x, dk, 1.0 - alpha) / (dk * g2)
        b[n - 1, k - 1] = 2.0 / (dk * (dk + tau[k])) * _first_moment(x, dk, alpha)

    coef = a - b
    rho = mesh.ratios  # rho[i] = rho_{i+1}
    # column k >= 2 picks up rho_{k-1} b^(n)_{n-k+1}; b's diagonal is zero so the
    # k = n entry becomes a^(n)_0 + rho_{n-1} b^(n)_1 automatically
    if N >= 2:
        coef[:, 1:] += b[:, :-1] * rho[np.newaxis, :]
    coef = np.tril(coef)
    for arr in (coef, a, b):
        arr.setflags(write=False)
    return KernelTable(scheme, mesh, coef, a, b)


def build_kernels(scheme: SchemeDescriptor | str, mesh: TimeMesh, alpha: float | None = None, **kw) -> KernelTable:
    """Dispatch on a scheme descriptor (or its kind string plus *alpha*)."""
    if isinstance(scheme, str):
        if alpha is None:
            raise TypeError("alpha is required when scheme is given by name")
        scheme = SchemeDescriptor(scheme, alpha)
    if scheme.kind == L1:
        return l1_kernels(mesh, scheme.alpha)
    return alikhanov_kernels(mesh, scheme.alpha, **kw)


def discrete_caputo(table: KernelTable, values) -> np.ndarray:
    """Discrete Caputo derivative at every level ``1..len(values)-1``."""
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[0] - 1
    if n < 1 or n > table.N:
        raise ValueError(f"need between 2 and {table.N + 1} values, got {v.shape[0]}")
    return table.coef[:n, :n] @ np.diff(v, axis=0)


def apply_discrete_caputo(table: KernelTable, values) -> float:
    """``sum_{k=1}^n A^(n)_{n-k} (v^k - v^{k-1})`` with ``n = len(values) - 1``."""
    v = np.asarray(values, dtype=np.float64)
    n = v.shape[0] - 1
    if n < 1 or n > table.N:
        raise ValueError(f"need between 2 and {table.N + 1} values, got {v.shape[0]}")
    return float(table.coef[n - 1, :n] @ np.diff(v))


def check_A1(table: KernelTable) -> tuple[bool, tuple[int, int] | None]:
    """Positivity and monotonicity of every kernel row.

    Returns ``(True, None)`` or ``(False, (n, j))`` where ``A^(n)_j`` is the
    first entry (scanning n upward) that is nonpositive or exceeds ``A^(n)_{j-1}``.
    """
    for n in range(1, table.N + 1):
        row = table.row(n)
        if row[-1] <= 0 or not np.all(np.isfinite(row)):
            bad = np.flatnonzero(~(row > 0))
            return False, (n, int(bad[0]) if bad.size else n - 1)
        up = np.flatnonzero(np.diff(row) > 0)
        if up.size:
            return False, (n, int(up[0]) + 1)
    return True, None


def check_A2(table: KernelTable) -> float:
    """Worst relative margin of the lower bound ``A^(n)_{n-k} >= avg_k(omega_{1-a}(t_n - .)) / pi_A``.

    Returns ``min (A / bound - 1)`` over all ``1 <= k <= n <= N``; the
    assumption holds when this is nonnegative. For L1 it is exactly 0.
    """
    avg = _l1_matrix(table.mesh, table.alpha)
    n, k = _lower_indices(table.N)
    bound = avg[n - 1, k - 1] / table.scheme.pi_A
    return float(np.min(table.coef[n - 1, k - 1] / bound - 1.0))


def check_mvt(table: KernelTable) -> tuple[bool, float]:
    """Strict sandwich ``A^(n)_{n-k+1} < omega_{1-a}(t_n - t_{k-1}) < A^(n)_{n-k}``, 2 <= k <= n.

    Meaningful for L1. Returns the verdict and the smallest relative gap seen.
    """
    alpha = table.alpha
    t = table.mesh.points
    n, k = _lower_indices(table.N)
    sel = k >= 2
    n, k = n[sel], k[sel]
    if not n.size:
        return True, math.inf
    w = (t[n] - t[k - 1]) ** (-alpha) / math.gamma(1.0 - alpha)
    upper = table.coef[n - 1, k - 1]
    lower = table.coef[n - 1, k - 2]
    gap = np.minimum((upper - w) / w, (w - lower) / w)
    return bool(np.all(gap > 0)), float(gap.min())


def lemma21_quantities(table: KernelTable, n: int) -> tuple[float, float]:
    """``(d_n, theta^(n))`` built from ``A^(n)_0`` and ``A^(n)_1``; needs n >= 2."""
    if n < 2:
        raise ValueError("d_n and theta^(n) need A^(n)_1, so n >= 2")
    a0 = table.A(n, 0)
    a1 = table.A(n, 1)
    if not a0 > a1:
        raise KernelError(f"degenerate row at n = {n}: A_0 = {a0} <= A_1 = {a1}")
    d = (2.0 * a0 - a1) / (a0 * (a0 - a1))
    th = (a0 - a1) / (2.0 * a0 - a1)
    return d, th
