"""Discrete complementary convolution (DCC) kernels.

For a kernel table with entries ``A^(n)_{n-k}`` the DCC kernels ``P^(n)_{n-j}``
are the unique lower-triangular weights with

    sum_{j=m}^{n} P^(n)_{n-j} A^(j)_{j-m} = 1,    1 <= m <= n.

They are stored as ``mat[n-1, j-1] = P^(n)_{n-j}``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from subdiff.kernels import KernelTable, check_A1, discrete_caputo

__all__ = [
    "DccError",
    "DccTable",
    "build_dcc",
    "check_identity",
    "check_p_bound",
    "check_telescoping",
    "npe_rhs",
    "weighted_sum",
]

log = logging.getLogger(__name__)


class DccError(ValueError):
    """Negative recursion weights: the kernels are not monotone."""


@dataclass(frozen=True, eq=False)
class DccTable:
    kernels: KernelTable
    mat: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.kernels.N

    def row(self, n: int) -> np.ndarray:
        """``[P^(n)_0, ..., P^(n)_{n-1}]``."""
        if not 1 <= n <= self.N:
            raise IndexError(f"level {n} outside 1..{self.N}")
        return self.mat[n - 1, :n][::-1].copy()

    def weights(self, n: int) -> np.ndarray:
        """``[P^(n)_{n-1}, ..., P^(n)_0]``, i.e. the weight of level ``j = 1..n``."""
        if not 1 <= n <= self.N:
            raise IndexError(f"level {n} outside 1..{self.N}")
        return self.mat[n - 1, :n].copy()

    def P(self, n: int, i: int) -> float:
        """Single entry ``P^(n)_i``."""
        if not 0 <= i < n:
            raise IndexError(f"P^({n})_{i} is not defined")
        return float(self.mat[n - 1, n - 1 - i])

    def row_sums(self) -> np.ndarray:
        """``sum_j P^(n)_{n-j}`` for n = 1..N."""
        return self.mat.sum(axis=1)

    def to_csv(self, path: str | Path) -> None:
        """One line per level n: ``n, P^(n)_0, ..., P^(n)_{n-1}``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for n in range(1, self.N + 1):
                w.writerow([n, *(repr(float(v)) for v in self.row(n))])


def build_dcc(table: KernelTable, *, strict: bool = True) -> DccTable:
    """Run the DCC recursion for every target level at once.

    ``P^(n)_{n-k} = (1/A^(k)_0) sum_{j>k} (A^(j)_{j-k-1} - A^(j)_{j-k}) P^(n)_{n-j}``
    is evaluated for ``k = N, N-1, ..., 1``; each step updates one column for
    all rows n, so the row-wise recursion is reproduced exactly.

    With *strict* set, a negative recursion weight (a kernel row that is not
    monotone) raises :class:`DccError` naming the offending indices.
    """
    coef = table.coef
    N = table.N
    if strict:
        ok, where = check_A1(table)
        if not ok:
            n, j = where
            raise DccError(f"kernel row n = {n} is not positive and monotone at A^({n})_{j}")
    # W[j-1, k-1] = A^(j)_{j-k-1} - A^(j)_{j-k} for k < j
    W = np.zeros((N, N))
    if N > 1:
        W[:, :-1] = coef[:, 1:] - coef[:, :-1]
        W = np.tril(W, -1)
    mat = np.zeros((N, N))
    for k in range(N, 0, -1):
        col = mat[:, k:] @ W[k:, k - 1] if k < N else np.zeros(N)
        col[k - 1] = 1.0
        mat[:, k - 1] = col / coef[k - 1, k - 1]
    mat = np.tril(mat)
    if np.any(mat < 0):
        n, j = np.argwhere(mat < 0)[0] + 1
        msg = f"negative DCC weight P^({n})_{n - j}"
        if strict:
            raise DccError(msg)
        log.warning(msg)
    mat.setflags(write=False)
    return DccTable(table, mat)


def check_identity(dcc: DccTable) -> float:
    """``max |sum_{j=m}^n P^(n)_{n-j} A^(j)_{j-m} - 1|`` over ``1 <= m <= n <= N``."""
    prod = dcc.mat @ dcc.kernels.coef
    target = np.tril(np.ones_like(prod))
    return float(np.max(np.abs(np.tril(prod) - target)))


def check_p_bound(dcc: DccTable) -> float:
    """Largest ``sum_j P^(n)_{n-j} - pi_A omega_{1+alpha}(t_n)``; nonpositive when the bound holds."""
    sch = dcc.kernels.scheme
    t = dcc.kernels.mesh.points[1:]
    bound = sch.pi_A * t**sch.alpha / math.gamma(1.0 + sch.alpha)
    return float(np.max(dcc.row_sums() - bound))


def _check_nu(n: int, N: int, nu) -> np.ndarray:
    v = np.asarray(nu, dtype=np.float64)
    if v.ndim != 1 or v.size != n:
        raise ValueError(f"need a sequence of length n = {n}, got shape {v.shape}")
    if not 1 <= n <= N:
        raise IndexError(f"level {n} outside 1..{N}")
    return v


def weighted_sum(dcc: DccTable, n: int, nu) -> float:
    """``sum_{k=1}^n P^(n)_{n-k} nu_k``; *nu* holds ``nu_1..nu_n``."""
    v = _check_nu(n, dcc.N, nu)
    return float(dcc.mat[n - 1, :n] @ v)


def npe_rhs(dcc: DccTable, n: int, nu) -> float:
    """``Gamma(2-a) pi_A sum_j tau_j max_{j<=k<=n} t_k^(a-1) nu_k``.

    The suffix maxima are taken exactly with one right-to-left scan.
    """
    v = _check_nu(n, dcc.N, nu)
    sch = dcc.kernels.scheme
    mesh = dcc.kernels.mesh
    w = mesh.points[1 : n + 1] ** (sch.alpha - 1.0) * v
    suffix = np.maximum.accumulate(w[::-1])[::-1]
    return math.gamma(2.0 - sch.alpha) * sch.pi_A * float(mesh.steps[:n] @ suffix)


def check_telescoping(dcc: DccTable, values) -> float:
    """Worst relative error of ``sum_j P^(n)_{n-j} D^j v = v^n - v^0`` over all n.

    *values* holds ``v^0..v^N``; the error at each n is scaled by
    ``max(|v^n - v^0|, max|v|)`` so that near-zero differences do not blow up.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size != dcc.N + 1:
        raise ValueError(f"need N + 1 = {dcc.N + 1} values")
    lhs = dcc.mat @ discrete_caputo(dcc.kernels, v)
    rhs = v[1:] - v[0]
    scale = np.maximum(np.abs(rhs), np.max(np.abs(v)))
    return float(np.max(np.abs(lhs - rhs) / scale))
