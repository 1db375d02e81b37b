"""Time meshes: uniform, graded, jittered-graded, plus step-ratio and M1 diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "M1_THRESHOLD",
    "MeshReport",
    "MeshValidationError",
    "Minstd",
    "TimeMesh",
    "check_A3",
    "check_M1",
    "graded_mesh",
    "jittered_graded_mesh",
    "mesh_from_json",
    "uniform_mesh",
]

M1_THRESHOLD = 10.0


class MeshValidationError(ValueError):
    """A constructed mesh fails one of its defining conditions."""


@dataclass(frozen=True, eq=False)
class TimeMesh:
    """Nonuniform grid ``0 = t_0 < t_1 < ... < t_N = T``.

    ``family`` is one of ``"uniform"``, ``"graded"`` or ``"general"``; ``gamma``
    records the grading exponent when the mesh was built from one.
    """

    points: np.ndarray
    family: str = "general"
    gamma: float | None = None
    steps: np.ndarray = field(init=False, repr=False)
    ratios: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise MeshValidationError("a mesh needs at least two points")
        if pts[0] != 0.0:
            raise MeshValidationError(f"mesh must start at 0, got {pts[0]}")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            bad = np.flatnonzero(steps <= 0) + 1
            raise MeshValidationError(f"points not strictly increasing at steps {bad.tolist()}")
        pts.setflags(write=False)
        steps.setflags(write=False)
        ratios = steps[:-1] / steps[1:]
        ratios.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "ratios", ratios)

    @property
    def N(self) -> int:
        return self.points.size - 1

    @property
    def T(self) -> float:
        return float(self.points[-1])

    @property
    def max_step(self) -> float:
        return float(self.steps.max())

    @property
    def max_ratio(self) -> float:
        """Largest ``tau_k / tau_{k+1}``; zero when ``N == 1``."""
        return float(self.ratios.max()) if self.ratios.size else 0.0

    def tau(self, k: int) -> float:
        """Step size ``tau_k = t_k - t_{k-1}`` (1-based)."""
        return float(self.steps[k - 1])

    def n_star(self, n: int, gamma: float) -> float:
        """Effective index ``(t_n / tau_1)^{1/gamma}`` used on M1-class meshes."""
        return float((self.points[n] / self.steps[0]) ** (1.0 / gamma))

    def to_dict(self) -> dict:
        d = {"T": self.T, "points": self.points.tolist(), "family": self.family}
        if self.gamma is not None:
            d["gamma"] = self.gamma
        return d

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeMesh):
            return NotImplemented
        return (
            self.family == other.family
            and self.gamma == other.gamma
            and np.array_equal(self.points, other.points)
        )

    def __hash__(self) -> int:
        return hash((self.family, self.gamma, self.points.tobytes()))


def mesh_from_json(source: str | Path | dict) -> TimeMesh:
    """Inverse of :meth:`TimeMesh.to_json`; accepts a JSON string, a path or a dict."""
    if isinstance(source, dict):
        d = source
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        d = json.loads(Path(source).read_text())
    else:
        d = json.loads(source)
    mesh = TimeMesh(np.asarray(d["points"], dtype=np.float64), d.get("family", "general"), d.get("gamma"))
    if not math.isclose(mesh.T, float(d["T"]), rel_tol=0, abs_tol=1e-14 * abs(float(d["T"]))):
        raise MeshValidationError("stored T disagrees with the last mesh point")
    return mesh


def uniform_mesh(T: float, N: int) -> TimeMesh:
    if N < 1:
        raise ValueError("N must be >= 1")
    if not T > 0:
        raise ValueError("T must be positive")
    pts = T * (np.arange(N + 1) / N)
    pts[-1] = T
    return TimeMesh(pts, "uniform", 1.0)


def graded_mesh(T: float, N: int, gamma: float) -> TimeMesh:
    """``t_k = T (k/N)^gamma``; ``gamma == 1`` reproduces :func:`uniform_mesh`."""
    if gamma < 1:
        raise ValueError(f"grading exponent must be >= 1, got {gamma}")
    if gamma == 1:
        m = uniform_mesh(T, N)
        return TimeMesh(m.points, "graded", 1.0)
    if N < 1:
        raise ValueError("N must be >= 1")
    pts = T * (np.arange(N + 1) / N) ** gamma
    pts[-1] = T
    return TimeMesh(pts, "graded", float(gamma))


class Minstd:
    """Park-Miller minimal standard generator (multiplier 48271, modulus 2^31 - 1).

    Kept explicit so that jittered meshes are bit-reproducible from a seed.
    """

    MODULUS = 2**31 - 1
    MULTIPLIER = 48271

    def __init__(self, seed: int) -> None:
        state = int(seed) % self.MODULUS
        self.state = state if state != 0 else 1

    def next_int(self) -> int:
        self.state = (self.state * self.MULTIPLIER) % self.MODULUS
        return self.state

    def random(self) -> float:
        """Uniform value in [0, 1)."""
        return self.next_int() / self.MODULUS


def jittered_graded_mesh(
    T: float,
    N: int,
    gamma: float,
    jitter: float,
    seed: int,
    *,
    m1_threshold: float = M1_THRESHOLD,
) -> TimeMesh:
    """Graded mesh whose interior steps are scaled by factors in ``[1-jitter, 1+jitter]``.

    Steps ``tau_2 .. tau_{N-1}`` are perturbed; the first and last steps keep
    their graded values before the whole mesh is rescaled to end at ``T``.
    ``jitter == 0`` returns the graded mesh itself.
    Raises :class:`MeshValidationError` if the result fails :func:`check_M1`
    against *m1_threshold*.
    """
    if not 0 <= jitter < 0.3:
        raise ValueError(f"jitter must lie in [0, 0.3), got {jitter}")
    base = graded_mesh(T, N, gamma)
    if jitter == 0:
        return base

    rng = Minstd(seed)
    steps = base.steps.copy()
    for k in range(1, N - 1):
        steps[k] *= 1.0 - jitter + 2.0 * jitter * rng.random()
    pts = np.concatenate(([0.0], np.cumsum(steps)))
    pts *= T / pts[-1]
    pts[-1] = T
    mesh = TimeMesh(pts, "general", float(gamma))
    if N >= 2:
        report = check_M1(mesh, gamma, threshold=m1_threshold)
        if not report.satisfies_M1:
            raise MeshValidationError(
                f"jittered mesh violates M1: C_gamma = {report.C_gamma:.3g} > {m1_threshold}"
            )
    return mesh


def check_A3(mesh: TimeMesh, rho_cap: float) -> tuple[bool, np.ndarray]:
    """Step-ratio test ``rho_k <= rho_cap``; returns the verdict and offending 1-based ``k``.

    Ratios within ``1e-12`` relative of the cap pass, so rounding in the
    mesh points does not fail a uniform mesh against ``rho_cap = 1``.
    """
    bad = np.flatnonzero(mesh.ratios > rho_cap * (1.0 + 1e-12)) + 1
    return bad.size == 0, bad


@dataclass(frozen=True)
class MeshReport:
    max_ratio: float
    C_1: float
    C_gamma: float
    gamma: float
    threshold: float
    satisfies_M1: bool
    mesh: TimeMesh = field(repr=False, compare=False)

    def satisfies_A3(self, rho_cap: float) -> bool:
        return self.max_ratio <= rho_cap * (1.0 + 1e-12)

    def n_star(self, n: int) -> float:
        return self.mesh.n_star(n, self.gamma)


def check_M1(mesh: TimeMesh, gamma: float, *, threshold: float = M1_THRESHOLD) -> MeshReport:
    """Fit the constants of the M1 mesh class.

    With ``tau = max_k tau_k`` the class asks for

    * ``tau_1 >= C_1 tau^gamma``
    * ``tau_k <= C_gamma tau min(1, t_k^(1 - 1/gamma))`` for all k
    * ``t_k <= C_gamma t_{k-1}`` and ``tau_k <= C_gamma tau_{k-1}`` for k >= 2.

    ``C_1`` is reported as the largest admissible value and ``C_gamma`` as the
    smallest; the mesh passes when ``C_gamma <= threshold``.
    """
    if mesh.N < 2:
        raise ValueError("check_M1 needs N >= 2")
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    t = mesh.points
    tau = mesh.steps
    tmax = tau.max()
    c1 = tau[0] / tmax**gamma
    envelope = tmax * np.minimum(1.0, t[1:] ** (1.0 - 1.0 / gamma))
    cg = max(
        float(np.max(tau / envelope)),
        float(np.max(t[2:] / t[1:-1])),
        float(np.max(tau[1:] / tau[:-1])),
    )
    return MeshReport(
        max_ratio=mesh.max_ratio,
        C_1=float(c1),
        C_gamma=cg,
        gamma=float(gamma),
        threshold=threshold,
        satisfies_M1=cg <= threshold,
        mesh=mesh,
    )
