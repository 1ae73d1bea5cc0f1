"""Measured errors against the explicit bounds under uniform refinement.

Run with ``python3 demos/convergence_study.py``.
"""

import math

from splinebounds.experiments import run_convergence

config = {
    "name": "sin-ritz",
    "target": {"id": "sin", "params": {"omega": 2.3 * math.pi}},
    "projector": "ritz:1",
    "degrees": [2, 3],
    "smoothness": "max",
    "r": [3],
    "ell": [0, 1],
    "schedule": [4, 8, 16, 32],
}
report = run_convergence(config)
print(f"{'p':>2} {'ell':>3} {'N':>3} {'error':>11} {'bound':>11} {'eff':>6} {'order':>6}")
for row in report.rows:
    print(f"{row.p:2d} {row.ell:3d} {row.N:3d} {row.error:11.3e} {row.bound:11.3e} "
          f"{row.effectivity:6.3f} {row.order:6.2f}")
print("all estimates hold" if report.passed else "an estimate failed")

# A target that is only C^1: the rate saturates at the Sobolev order 2.
rough = run_convergence({"target": {"id": "piecewise_c1"}, "projector": "l2", "degrees": [2, 4],
                         "smoothness": "max", "r": [2], "schedule": [3, 7, 15, 31]})
for p in (2, 4):
    order = next(r.order for r in rough.rows if r.p == p)
    print(f"piecewise C^1 target, p={p}: fitted order {order:.2f}")
