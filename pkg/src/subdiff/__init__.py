"""Alpha-robust discretizations of a reaction-subdiffusion problem on nonuniform time meshes.

Bottom-up layers: special functions, time meshes, discrete Caputo kernels
(L1 and Alikhanov), their complementary convolution kernels, a finite
difference solver, evaluators for the error analysis, and an experiment harness.
"""

from __future__ import annotations

import logging

from subdiff.dcc import DccTable, build_dcc, check_identity, check_p_bound, npe_rhs, weighted_sum
from subdiff.kernels import (
    ALIKHANOV,
    L1,
    KernelTable,
    SchemeDescriptor,
    alikhanov_kernels,
    apply_discrete_caputo,
    build_kernels,
    check_A1,
    check_A2,
    l1_kernels,
    lemma21_quantities,
)
from subdiff.mesh import TimeMesh, check_A3, check_M1, graded_mesh, jittered_graded_mesh, mesh_from_json, uniform_mesh
from subdiff.solver import Problem, Solution, SpatialGrid, discrete_l2_norm, solve, thomas_solve
from subdiff.special import caputo_power, gamma_fn, mittag_leffler, omega

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"

__all__ = [
    "ALIKHANOV",
    "L1",
    "DccTable",
    "KernelTable",
    "Problem",
    "SchemeDescriptor",
    "Solution",
    "SpatialGrid",
    "TimeMesh",
    "alikhanov_kernels",
    "apply_discrete_caputo",
    "build_dcc",
    "build_kernels",
    "caputo_power",
    "check_A1",
    "check_A2",
    "check_A3",
    "check_M1",
    "check_identity",
    "check_p_bound",
    "discrete_l2_norm",
    "gamma_fn",
    "graded_mesh",
    "jittered_graded_mesh",
    "l1_kernels",
    "lemma21_quantities",
    "mesh_from_json",
    "mittag_leffler",
    "npe_rhs",
    "omega",
    "solve",
    "thomas_solve",
    "uniform_mesh",
    "weighted_sum",
]
