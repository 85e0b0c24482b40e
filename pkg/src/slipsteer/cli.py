"""Command-line front end: single runs, controller comparisons, studies.

    slipsteer simulate --scenario cfg [--out DIR] [--controller X] [--seed N]
    slipsteer compare  --scenario cfg --controllers B,PROP,PROP-S --seeds N
    slipsteer figures  --figure fig4|fig5|fig6|fig7|fig8|fig13 [--out DIR]

Every output file records the manifest hash of the configuration that
produced it; identical configurations reproduce identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__, analysis, svg
from .engine import RunFailure, SimTrace, batch, run
from .metrics import METRIC_NAMES, aggregate, report_csv, report_text, segment_metrics
from .scenario import CONTROLLERS, ConfigError, Scenario, load_scenario, rainy


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _apply_overrides(scn: Scenario, args) -> Scenario:
    if args.controller:
        scn = replace(scn, controller=args.controller)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    if getattr(args, "preset", None) == "rainy":
        scn = rainy(scn)
    return scn


def _summary(trace: SimTrace) -> dict:
    per_seg = []
    for m in segment_metrics(trace):
        per_seg.append({"seg": m.seg_index, "E_RMS": m.E_RMS, "E_RNG": m.E_RNG,
                        "E_L10": m.E_L10, "converged": m.converged,
                        "A_RMS": m.A_RMS, "short_segment": m.short_segment})
    return {
        "version": __version__,
        "manifest": trace.manifest_hash,
        "scenario": trace.scenario.name,
        "controller": trace.scenario.controller,
        "seed": trace.scenario.seed,
        "steps": trace.n_steps,
        "flags": trace.flags,
        "final_y_e": float(trace["y_e"][-1]),
        "max_abs_phi": float(np.abs(trace["phi"]).max()),
        "max_abs_omega": float(np.abs(trace["omega"]).max()),
        "segments": per_seg,
    }


def cmd_simulate(args) -> int:
    scn = _apply_overrides(load_scenario(args.scenario), args)
    out = _ensure_out(args.out)
    try:
        trace = run(scn)
    except Exception as exc:
        print(f"run aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    trace.to_csv(os.path.join(out, "trace.csv"))
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(_summary(trace), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}/trace.csv and {out}/summary.json "
          f"(manifest {trace.manifest_hash})")
    return 0


def cmd_compare(args) -> int:
    base = load_scenario(args.scenario)
    if args.preset == "rainy":
        base = rainy(base)
    controllers = [c.strip() for c in args.controllers.split(",") if c.strip()]
    if len(controllers) < 2:
        print("compare needs at least two controllers", file=sys.stderr)
        return 1
    for c in controllers:
        if c not in CONTROLLERS:
            print(f"unknown controller {c!r}", file=sys.stderr)
            return 1
    out = _ensure_out(args.out)
    aggregates = []
    for ctl in controllers:
        scns = [replace(base, controller=ctl, seed=base.seed + k)
                for k in range(args.seeds)]
        results = batch(scns, workers=args.workers)
        for res in results:
            if isinstance(res, RunFailure):
                print(f"note: {ctl} seed run failed: {res.error}", file=sys.stderr)
        aggregates.append(aggregate(results, ctl))
    text = report_text(aggregates)
    with open(os.path.join(out, "comparison.txt"), "w") as fh:
        fh.write(f"# manifest {base.manifest_hash()} seeds={args.seeds}\n")
        fh.write(text)
    with open(os.path.join(out, "comparison.csv"), "w") as fh:
        fh.write(report_csv(aggregates))
    with open(os.path.join(out, "comparison.json"), "w") as fh:
        json.dump({"version": __version__, "manifest": base.manifest_hash(),
                   "seeds": args.seeds,
                   "aggregates": [{"controller": a.controller,
                                   "n_runs": a.n_runs,
                                   "n_failures": a.n_failures,
                                   "segments": a.rows} for a in aggregates]},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    segs = sorted({s for a in aggregates for s in a.rows})
    for metric in METRIC_NAMES:
        chart = svg.LineChart(title=f"{metric} by segment", x_label="segment",
                              y_label=metric)
        for a in aggregates:
            ys = [a.rows[s][f"{metric}_avg"] for s in segs if s in a.rows]
            chart.add(a.controller, list(range(len(ys))), ys)
        chart.save(os.path.join(out, f"compare_{metric.lower()}.svg"),
                   comment=f"manifest {base.manifest_hash()}")
    print(text)
    print(f"wrote comparison outputs under {out}/")
    return 0


def _figure_fig4(out: str) -> None:
    data = analysis.fig4_slip_curves()
    analysis.write_csv(os.path.join(out, "fig4.csv"),
                       ["v", "kappa_max", "beta", "alpha_r", "delta_ar", "coeff"],
                       [data[k] for k in ("v", "kappa_max", "beta", "alpha_r",
                                          "delta_ar", "coeff")])
    chart = svg.LineChart(title="slip compensation residual vs speed",
                          x_label="v (m/s)", y_label="delta_ar (rad)")
    chart.add("delta_ar", data["v"], data["delta_ar"])
    chart.add("zero", data["v"], np.zeros_like(data["v"]))
    chart.save(os.path.join(out, "fig4.svg"))


def _figure_fig5(out: str) -> None:
    data = analysis.fig5_saturation_regions()
    rows = []
    for (c, v), mask in data["panels"].items():
        area = float(mask.mean())
        rows.append((c, v, area))
        body = svg.grid_chart(mask, data["theta_grid"], data["y_grid"],
                              title=f"unsaturated steering rate, c={c}, v={v}",
                              x_label="theta_e (rad)", y_label="y_e (m)")
        with open(os.path.join(out, f"fig5_c{c}_v{int(v)}.svg"), "w") as fh:
            fh.write(body)
    arr = np.asarray(rows)
    analysis.write_csv(os.path.join(out, "fig5_areas.csv"),
                       ["c", "v", "unsaturated_fraction"],
                       [arr[:, 0], arr[:, 1], arr[:, 2]])


def _figure_fig6(out: str) -> None:
    data = analysis.fig6_convergence_studies()
    chart = svg.LineChart(title="step convergence vs gain (10 m/s)",
                          x_label="t (s)", y_label="y_e (m)")
    for c, tr in data["gain_sweep"].items():
        chart.add(f"c={c}", tr["t"], tr["y_e"])
        analysis.write_csv(os.path.join(out, f"fig6_gain_c{c}.csv"),
                           ["t", "y_e", "a_y"], [tr["t"], tr["y_e"], tr["a_y"]])
    chart.save(os.path.join(out, "fig6_gain_sweep.svg"))
    chart = svg.LineChart(title="step convergence vs perturbation (c=2)",
                          x_label="t (s)", y_label="y_e (m)")
    for y0, tr in data["perturbation_sweep"].items():
        chart.add(f"y0={y0}", tr["t"], tr["y_e"])
        analysis.write_csv(os.path.join(out, f"fig6_pert_y{y0}.csv"),
                           ["t", "y_e", "a_y"], [tr["t"], tr["y_e"], tr["a_y"]])
    chart.save(os.path.join(out, "fig6_perturbation_sweep.svg"))


def _figure_fig7(out: str) -> None:
    data = analysis.fig7_c_surface()
    with open(os.path.join(out, "fig7.csv"), "w") as fh:
        fh.write("# appropriate constant gain; acceleration budget "
                 f"{data['a_peak_target']!r} m/s^2\n")
        fh.write("y0\\v," + ",".join(repr(float(v)) for v in data["v"]) + "\n")
        for i, y0 in enumerate(data["y0"]):
            fh.write(repr(float(y0)) + "," +
                     ",".join(repr(float(x)) for x in data["c_star"][i]) + "\n")
    chart = svg.LineChart(title="appropriate gain vs speed", x_label="v (m/s)",
                          y_label="c*")
    for i, y0 in enumerate(data["y0"]):
        chart.add(f"y0={y0}", data["v"], data["c_star"][i])
    chart.save(os.path.join(out, "fig7.svg"))


def _figure_fig8(out: str) -> None:
    data = analysis.fig8_startup_portraits()
    chart = svg.LineChart(title="startup phase portraits",
                          x_label="y_e (m)", y_label="theta_bar_e (rad)")
    for (ic, mode), tr in data.items():
        chart.add(f"{ic}/{mode}", tr["y_e"], tr["theta_bar_e"])
        analysis.write_csv(os.path.join(out, f"fig8_{ic}_{mode}.csv"),
                           ["t", "y_e", "theta_bar_e", "a_y", "c_now"],
                           [tr["t"], tr["y_e"], tr["theta_bar_e"], tr["a_y"],
                            tr["c_now"]])
    chart.save(os.path.join(out, "fig8.svg"))


def _figure_fig13(out: str) -> None:
    data = analysis.fig13_w_dot()
    analysis.write_csv(os.path.join(out, "fig13.csv"), ["S_kin", "W_dot"],
                       [data["S_kin"], data["W_dot"]])
    chart = svg.LineChart(title="boundary-layer Lyapunov rate",
                          x_label="S_kin", y_label="W_dot")
    chart.add("W_dot", data["S_kin"], data["W_dot"])
    chart.save(os.path.join(out, "fig13.svg"))


FIGURES = {"fig4": _figure_fig4, "fig5": _figure_fig5, "fig6": _figure_fig6,
           "fig7": _figure_fig7, "fig8": _figure_fig8, "fig13": _figure_fig13}


def cmd_figures(args) -> int:
    out = _ensure_out(args.out)
    names = list(FIGURES) if args.figure == "all" else [args.figure]
    for name in names:
        FIGURES[name](out)
        print(f"wrote {name} data under {out}/")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="slipsteer",
                                     description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--out", default="runs")
    p_sim.add_argument("--controller", choices=CONTROLLERS)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--preset", choices=("clear", "rainy"), default="clear")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="batch-compare controllers")
    p_cmp.add_argument("--scenario", required=True)
    p_cmp.add_argument("--controllers", default="B,PROP,PROP-S")
    p_cmp.add_argument("--seeds", type=int, default=10)
    p_cmp.add_argument("--preset", choices=("clear", "rainy"), default="clear")
    p_cmp.add_argument("--workers", type=int, default=1)
    p_cmp.add_argument("--out", default="runs")
    p_cmp.set_defaults(func=cmd_compare)

    p_fig = sub.add_parser("figures", help="regenerate study figures")
    p_fig.add_argument("--figure", choices=list(FIGURES) + ["all"], required=True)
    p_fig.add_argument("--out", default="figures")
    p_fig.set_defaults(func=cmd_figures)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
