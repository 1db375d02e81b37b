"""Discrete Caputo kernels and their complementary kernels on a graded mesh.

Builds L1 and Alikhanov kernel tables, checks the monotonicity assumptions,
and verifies the complementary-kernel identity and the P-bound.
"""

from __future__ import annotations

from subdiff import ALIKHANOV, L1, build_dcc, build_kernels, check_A1, check_A2, check_identity, check_p_bound, graded_mesh

mesh = graded_mesh(1.0, 128, 2.0)
print(f"graded mesh: N={mesh.N}, max step {mesh.max_step:.3e}, max ratio {mesh.max_ratio:.3f}")
for kind in (L1, ALIKHANOV):
    for alpha in (0.3, 0.9, 0.99):
        k = build_kernels(kind, mesh, alpha)
        d = build_dcc(k)
        print(
            f"{kind:9s} alpha={alpha:<5g} A1={check_A1(k)[0]} A2 margin={check_A2(k):.1e} "
            f"identity residual={check_identity(d):.1e} P-bound excess={check_p_bound(d):.1e}"
        )
