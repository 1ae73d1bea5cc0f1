"""Projections on a curved domain and on a two-patch square.

Run with ``python3 demos/mapped_geometry.py``.
"""

import math

from splinebounds.corpus import tensor_corpus
from splinebounds.geometry import (
    geometry_constants,
    interface_jump,
    mapped_project,
    mapped_ritz_bound,
    multipatch_q_project,
    physical_norm_table,
    quadratic_spline_map,
    two_patch_square,
)
from splinebounds.spline_core import SplineSpace, uniform_knots
from splinebounds.tensor import TensorSpace

u = tensor_corpus("sin_product", {"omega": [math.pi, math.pi]})
G = quadratic_spline_map()
consts = geometry_constants(G, 2)
print(f"quadratic spline map: C_G = {consts.C_G:.4f} (sup det {consts.det_sup:.3f}, "
      f"sup 1/det {consts.inv_det_sup:.3f}), sampled at {consts.resolution} points per element side")

for N in (3, 7, 15):
    sp = SplineSpace(uniform_knots(0, 1, N), 2, 1)
    ts = TensorSpace((sp, sp))
    res = mapped_project(G, ts, u, "ritz")
    norms = physical_norm_table(G, ts, u, 2)
    cells = []
    for ell in [(0, 0), (1, 0), (0, 1)]:
        err, bound = res.physical_error(u, ell), mapped_ritz_bound(consts, ts, ell, norms)
        cells.append(f"ell={ell}: {err:.2e} <= {bound:.2e}")
    print(f"N={N:2d}  " + "  ".join(cells))

sp = SplineSpace(uniform_knots(0, 1, 4), 3, 2)
mp = two_patch_square(TensorSpace((sp, sp)))
jump = interface_jump(mp, multipatch_q_project(mp, u))
print(f"two-patch square: largest interface mismatch of the Q projection {jump:.1e}")
