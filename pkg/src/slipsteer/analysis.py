"""Study and figure-data generators backing the design's numerical checks.

Each generator recomputes its results from the controller and simulator
modules (nothing is baked in) and returns plain arrays ready for CSV/SVG
export through the command-line front end or the demo scripts.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from . import paths
from .engine import run
from .kinematic import (VERIFICATION_GAINS, KinGains, boundary_layer_w_dot,
                        steering_saturation_region, tracking_error_jacobian)
from .scenario import Disturbances, Scenario, SpeedProfile
from .vehicle import (ESTIMATED_PARAMS, NOMINAL_PARAMS, VehicleParams,
                      max_curvature, resolve_rear_slip, sideslip_perturbation,
                      steady_state_sideslip)

VERIFICATION_POINT = {"c": 0.65, "K_i": 0.04, "psi_kin": 0.1, "eps_kin": 0.1,
                  "v_bar": 10.0, "sigma_ss": 0.0}


def verification_eigenvalues() -> np.ndarray:
    """Eigenvalues of the closed kinematic loop at the verification point."""
    J = tracking_error_jacobian(c=VERIFICATION_POINT["c"], K_i=VERIFICATION_POINT["K_i"],
                                psi_kin=VERIFICATION_POINT["psi_kin"],
                                eps_kin=VERIFICATION_POINT["eps_kin"],
                                v_bar=VERIFICATION_POINT["v_bar"],
                                sigma_ss=VERIFICATION_POINT["sigma_ss"])
    eig = np.linalg.eigvals(J)
    return eig[np.argsort(np.abs(eig.imag))]


def delta_ar_zero_crossing(params: VehicleParams = ESTIMATED_PARAMS,
                           v_lo: float = 1.0, v_hi: float = 40.0,
                           tol: float = 1e-6) -> float:
    """Speed where the slip-compensation residual changes sign (bisection)."""
    def f(v: float) -> float:
        return sideslip_perturbation(max_curvature(v, params), params, v)

    f_lo, f_hi = f(v_lo), f(v_hi)
    if f_lo == 0.0:
        return v_lo
    if f_lo * f_hi > 0.0:
        raise ValueError("no sign change in the given speed range")
    lo, hi = v_lo, v_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fig4_slip_curves(params: VehicleParams = ESTIMATED_PARAMS,
                     v_grid: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Slip angles, compensation residual, curvature bound, and the
    rear-slip coefficient as functions of speed."""
    if v_grid is None:
        v_grid = np.linspace(1.0, 40.0, 157)
    rows = {k: [] for k in ("v", "kappa_max", "beta", "alpha_r", "delta_ar", "coeff")}
    for v in v_grid:
        km = max_curvature(v, params)
        beta = steady_state_sideslip(km, params, v)
        try:
            alpha_r = resolve_rear_slip(beta, params, v)
        except ValueError:
            alpha_r = float("nan")
        rows["v"].append(v)
        rows["kappa_max"].append(km)
        rows["beta"].append(beta)
        rows["alpha_r"].append(alpha_r)
        rows["delta_ar"].append(sideslip_perturbation(km, params, v))
        denom = params.C_r * params.L * params.L_r / (params.m * v * v * params.L_f) - 1.0
        rows["coeff"].append(-1.0 / denom if abs(denom) > 1e-9 else float("nan"))
    return {k: np.asarray(v) for k, v in rows.items()}


def fig5_saturation_regions(params: VehicleParams = NOMINAL_PARAMS,
                            c_values=(0.5, 1.0, 2.0), v_values=(2.0, 5.0, 10.0),
                            n: int = 41) -> dict:
    """Unsaturated steering-rate regions over (y_e, theta_e) per (c, v)."""
    gains = KinGains(psi_kin=0.1, eps_kin=0.1)
    y_grid = np.linspace(-3.0, 3.0, n)
    th_grid = np.linspace(-0.5, 0.5, n)
    panels = {}
    for c in c_values:
        for v in v_values:
            panels[(c, v)] = steering_saturation_region(gains, params, v, c,
                                                        y_grid, th_grid)
    return {"y_grid": y_grid, "theta_grid": th_grid, "panels": panels}


def _straight_run(c: float, v: float, y0: float, duration: float = 12.0,
                  controller: str = "PROP", seed: int = 0,
                  length: float = 600.0) -> "SimTrace":
    K_i = min(0.1, c / 10.0)  # the integral gain must stay well below c
    scn = Scenario(name=f"study_c{c}_v{v}_y{y0}", controller=controller,
                   segments=(paths.line(length),),
                   kin_gains=KinGains(c0=c, c_ss=c, K_i=K_i), c_mode="constant",
                   speed=SpeedProfile(((0.0, v),)), y_e0=y0, theta_e0=0.0,
                   disturbances=Disturbances(yaw_noise_std=0.0),
                   feedback="state", duration=duration, seed=seed)
    return run(scn)


def fig6_convergence_studies() -> dict:
    """Step-convergence traces: a gain sweep and a perturbation sweep."""
    row1 = {}
    for c in (0.65, 2.0, 3.0, 5.0):
        tr = _straight_run(c, 10.0, 0.25)
        row1[c] = {"t": tr["t"], "y_e": tr["y_e"], "a_y": tr["a_y"]}
    row2 = {}
    for y0 in (0.25, 0.5, 1.0):
        tr = _straight_run(2.0, 10.0, y0)
        row2[y0] = {"t": tr["t"], "y_e": tr["y_e"], "a_y": tr["a_y"]}
    return {"gain_sweep": row1, "perturbation_sweep": row2}


def appropriate_c(v: float, y0: float, a_peak_target: float,
                  c_lo: float = 0.2, c_hi: float = 6.0,
                  iters: int = 7) -> float:
    """Largest constant convergence gain that absorbs the step gracefully.

    Graceful means the run converges (no rate-saturation oscillation),
    overshoots by no more than 30% of the step, and keeps the lateral
    acceleration within the budget.  Found by bisection over closed-loop
    runs; sweeps at low speed are limited by saturation and overshoot, at
    high speed by the acceleration budget.
    """
    def graceful(c: float) -> bool:
        duration = min(30.0, max(8.0, 4.0 / c + 8.0))
        try:
            tr = _straight_run(c, v, y0, duration=duration,
                               length=max(60.0, duration * v + 30))
        except Exception:
            return False
        ye = tr["y_e"]
        sign = 1.0 if y0 >= 0 else -1.0
        overshoot = float(np.maximum(0.0, -sign * ye).max())
        return (abs(float(ye[-1])) < max(0.02, 0.1 * abs(y0))
                and overshoot <= 0.3 * abs(y0)
                and float(np.abs(tr["a_y"]).max()) <= a_peak_target)

    if not graceful(c_lo):
        return c_lo
    lo, hi = c_lo, c_hi
    if graceful(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if graceful(mid):
            lo = mid
        else:
            hi = mid
    return lo


def fig7_c_surface(v_values=(2.0, 5.0, 8.0, 15.0, 25.0),
                   y0_values=(0.25, 0.5, 1.0)) -> dict:
    """Appropriate-gain surface over speed and perturbation size.

    The gracefulness budget is anchored at the reference condition
    (10 m/s, 0.25 m, c = 3).
    """
    anchor = _straight_run(3.0, 10.0, 0.25)
    target = float(np.abs(anchor["a_y"]).max())
    surface = np.zeros((len(y0_values), len(v_values)))
    for i, y0 in enumerate(y0_values):
        for j, v in enumerate(v_values):
            surface[i, j] = appropriate_c(v, y0, target)
    return {"v": np.asarray(v_values), "y0": np.asarray(y0_values),
            "c_star": surface, "a_peak_target": target}


def fig8_startup_portraits(v_ss: float = 10.0) -> dict:
    """From-rest phase portraits for both gain-start techniques."""
    out = {}
    for ic_label, (y0, th0) in {"same_sign": (0.5, 0.15),
                                "opposite_sign": (0.5, -0.15)}.items():
        for mode in ("fixed", "solve"):
            scn = Scenario(name=f"fig8_{ic_label}_{mode}",
                           segments=(paths.line(400.0),), controller="PROP",
                           c0_mode=mode, y_e0=y0, theta_e0=th0,
                           speed=SpeedProfile(((0.0, 0.0), (5.0, v_ss))),
                           disturbances=Disturbances(yaw_noise_std=0.0),
                           feedback="state", duration=20.0)
            tr = run(scn)
            out[(ic_label, mode)] = {"t": tr["t"], "y_e": tr["y_e"],
                                     "theta_bar_e": tr["theta_bar_e"],
                                     "a_y": tr["a_y"], "c_now": tr["c_now"]}
    return out


def fig13_w_dot(n: int = 201) -> dict:
    """Boundary-layer Lyapunov rate over a symmetric manifold-value grid."""
    S = np.linspace(-1.0, 1.0, n)
    S = S[S != 0.0]
    w = boundary_layer_w_dot(S, VERIFICATION_GAINS, c=VERIFICATION_POINT["c"],
                             v_bar=VERIFICATION_POINT["v_bar"])
    return {"S_kin": S, "W_dot": w}


def write_csv(path: str, header: list[str], columns: list[np.ndarray],
              comment: str = "") -> None:
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
