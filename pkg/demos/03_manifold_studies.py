"""Numerical verification of the manifold design.

Reproduces the three desk checks: the closed-loop Jacobian eigenvalues at
the verification point, the boundary-layer Lyapunov rate over the
manifold-value grid, and the steering-rate saturation regions that guide
the choice of convergence gain.

Run:  python demos/03_manifold_studies.py
"""

import os

import numpy as np

from slipsteer import analysis, svg
from slipsteer.kinematic import safety_cap, k2_bound, KinGains
from slipsteer.vehicle import ESTIMATED_PARAMS, max_curvature, sideslip_perturbation

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

eig = analysis.verification_eigenvalues()
print("closed-loop tracking-error eigenvalues at the verification point:")
for z in eig:
    print(f"  {z.real:+.4f} {z.imag:+.4f}i")

data = analysis.fig13_w_dot()
print(f"\nboundary-layer Lyapunov rate: max over the grid = {data['W_dot'].max():.2e}"
      "\n(negative everywhere except the manifold itself)")
analysis.write_csv(os.path.join(OUT, "lyapunov_rate.csv"), ["S_kin", "W_dot"],
                   [data["S_kin"], data["W_dot"]])

regions = analysis.fig5_saturation_regions()
print("\nunsaturated steering-rate fraction of the error grid:")
for (c, v), mask in sorted(regions["panels"].items()):
    print(f"  c = {c:3.1f}, v = {v:4.1f} m/s: {100.0 * mask.mean():5.1f}%")
print("higher speed widens the region; larger gains shrink it at low speed.")

gains = KinGains()
delta = sideslip_perturbation(max_curvature(10.0, ESTIMATED_PARAMS),
                              ESTIMATED_PARAMS, 10.0)
cap = safety_cap(gains, 10.0, 0.5, y_e=0.5, theta_bar_e=0.0, delta_ar=delta,
                 c_dot=0.0)
print(f"\nwet-road safety bound on the convergence gain: c < {cap:.2f}")
print(f"authority split: k2 < {k2_bound(0.02, 10.0, 0.8, 0.5):.2f} wet, "
      f"k2 < {k2_bound(0.02, 10.0, 0.8, 0.7):.2f} dry")
