"""The three evaluation courses: geometry, lengths, and curvature profiles.

Run:  python demos/02_paths.py
"""

import os

import numpy as np

from slipsteer import svg
from slipsteer.paths import PATHS

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

for name, factory in PATHS.items():
    path = factory()
    bounds = path.segment_boundaries()
    print(f"{name}: {len(path.segments)} segments, {path.total_length:.1f} m")
    for i, seg in enumerate(path.segments):
        print(f"  seg {i}: {seg.kind:8s} length {seg.length:6.1f} m  "
              f"kappa {seg.kappa_start:+.4f} -> {seg.kappa_end:+.4f}")
    table = path.polyline(step=1.0)
    np.savetxt(os.path.join(OUT, f"{name}_polyline.csv"), table,
               delimiter=",", header="s,x,y,theta,kappa", comments="")
    chart = svg.LineChart(title=f"{name} plan view", x_label="x (m)",
                          y_label="y (m)")
    chart.add(name, table[:, 1], table[:, 2])
    chart.save(os.path.join(OUT, f"{name}_plan.svg"))
    chart = svg.LineChart(title=f"{name} curvature profile",
                          x_label="s (m)", y_label="kappa (1/m)")
    chart.add("kappa", table[:, 0], table[:, 4])
    chart.save(os.path.join(OUT, f"{name}_kappa.svg"))

print(f"\nwrote polylines and charts under {OUT}/")
print("note the curvature jumps: they are the stress feature of the courses.")
