"""Logarithmic factors across the regularity regimes and the generated tables."""

from __future__ import annotations

import math

from subdiff.harness import factor_table_rows
from subdiff.theory import factor_values

n = 1000
for sigma in (0.4, 0.5, 0.6):
    f = factor_values("L1", 0.5, sigma, 3.0, n)
    print(f"L1 alpha=0.5 gamma=3 sigma={sigma}: varsigma={f.varsigma:.4f} zeta={f.zeta:.4f} (ln n = {math.log(n):.4f})")
for table in (1, 2):
    rows, _ = factor_table_rows(table)
    print(f"table {table}: {len(rows)} cells, all match = {all(r['match'] for r in rows)}")
