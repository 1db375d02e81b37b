"""The discrete fractional Gronwall inequality on admissible and corrupted data."""

from __future__ import annotations

import numpy as np

from subdiff import build_dcc, build_kernels, graded_mesh
from subdiff.harness import admissible_gronwall_set, corrupt_gronwall_set
from subdiff.theory import GronwallHypothesisError, check_dfgi

rng = np.random.default_rng(0)
k = build_kernels("Alikhanov", graded_mesh(1.0, 64, 2.0), 0.7)
d = build_dcc(k)
held = 0
for _ in range(20):
    s = admissible_gronwall_set(k, rng)
    held += check_dfgi(k, d, s["v"], s["g"], s["lambdas"], s["Lambda"])
print(f"admissible sets: conclusion holds in {held}/20")
rejected = 0
for _ in range(20):
    c = corrupt_gronwall_set(k, rng)
    try:
        check_dfgi(k, d, c["v"], c["g"], c["lambdas"], c["Lambda"])
    except GronwallHypothesisError:
        rejected += 1
print(f"corrupted sets: hypothesis rejected in {rejected}/20")
