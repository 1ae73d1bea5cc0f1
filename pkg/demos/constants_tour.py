"""A tour of the explicit constants.

Run with ``python3 demos/constants_tour.py``.
"""

import math

from splinebounds.constants import (
    C_hpkr,
    EstimateQuery,
    crossover_h,
    dof_constant,
    max_smooth_bounds,
)

print("Per-degree-of-freedom constants for r = 3 (rows: p, columns: k = -1 .. p-1)")
for p in range(2, 8):
    vals = " ".join(f"{dof_constant(p, k, 3):.3e}" for k in range(-1, p))
    print(f"  p={p:2d}: {vals}")
print(f"  maximal smoothness gives (1/pi)^3 = {(1 / math.pi) ** 3:.7f} for every p\n")

# The bound C_{h,p,k,r} is the smaller of a spline argument (c h^r) and a
# polynomial argument; which one wins depends on h.
L = 1.0
h_star = crossover_h(10, 11, L)
print(f"p=10, r=11: the two arguments balance at h* = {h_star:.4f}")
for h in (0.5, 0.2, h_star, 0.1, 0.01):
    b = C_hpkr(EstimateQuery(p=10, k=9, r=11, h=h, L=L))
    print(f"  h={h:.4f}: minimum {b.minimum:.3e}, argmin {b.argmin}")

print("\nMaximal-smoothness candidates for p=6, r=3, h=0.05:")
b = max_smooth_bounds(EstimateQuery(p=6, k=5, r=3, h=0.05, L=1.0))
for name, v in sorted(b.candidates.items(), key=lambda kv: kv[1]):
    print(f"  {name:18s} {v:.4e}")
