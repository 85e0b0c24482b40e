"""One closed-loop run on the L course, from rest, full output feedback.

Run:  python demos/04_l_path_run.py
"""

import os

import numpy as np

from slipsteer import svg
from slipsteer.engine import run
from slipsteer.metrics import segment_metrics
from slipsteer.scenario import l_path_scenario

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

scn = l_path_scenario("PROP", v_ss=7.0)
trace = run(scn)
trace.to_csv(os.path.join(OUT, "l_path_trace.csv"))

print(f"ran {trace.n_steps} steps, reached path end: "
      f"{trace.flags['reached_path_end']}")
print("per-segment metrics (line / arc / line):")
for m in segment_metrics(trace):
    print(f"  seg {m.seg_index}: E_RMS={m.E_RMS:.3f}  E_RNG={m.E_RNG:.3f}  "
          f"E_L10={m.E_L10:.3f}  A_RMS={m.A_RMS:.3f}  converged={m.converged}")

chart = svg.LineChart(title="lateral error on the L course",
                      x_label="t (s)", y_label="y_e (m)")
chart.add("y_e", trace["t"], trace["y_e"])
chart.save(os.path.join(OUT, "l_path_y_e.svg"))
chart = svg.LineChart(title="commands", x_label="t (s)", y_label="rad/s")
chart.add("yaw command", trace["t"], trace["r_kin"])
chart.add("yaw rate", trace["t"], trace["r"])
chart.add("steering rate", trace["t"], trace["omega"])
chart.save(os.path.join(OUT, "l_path_commands.svg"))
print(f"wrote trace and charts under {OUT}/")
print("the two curvature jumps (line-arc joints) show up as brief "
      "steering-rate saturation bursts.")
