"""Closed-loop fixed-step simulation of the full steering stack.

Loop order per step: reference projection and error update, convergence
gain schedule, kinematic yaw-rate command, dynamic steering-rate command,
actuator limits, truth-plant integration (RK4, sub-stepped when the tire
dynamics are stiff at low speed), sensor sampling, observer update.
Runs are bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import baselines, dynamic, kinematic, observer as obsmod
from .errors import ErrorState, initial_error_state, update_reference
from .scenario import Scenario
from .vehicle import (GRAVITY, PlantState, SingularSpeedError, dyn_coeffs,
                      floored_speed, nonlinear_truth_deriv, resolve_rear_slip,
                      sideslip_perturbation, tire_slip_angles, wrap_angle)

TRACE_COLUMNS = (
    "t", "s_ref", "x", "y", "theta", "v", "beta", "r", "phi", "alpha_r", "v_B",
    "y_meas", "r_hat", "beta_hat", "y_e", "theta_e", "theta_bar_e", "sigma_k",
    "v_ref", "kappa_ref", "x_resid", "c_now", "S_kin", "rho_kin",
    "r_kin_raw", "r_kin", "r_kin_clipped", "phi_des", "omega",
    "omega_clipped", "phi_clipped", "a_y", "a_y_ref", "r_threshold",
)


class NonFiniteStateError(RuntimeError):
    """Plant state left the finite range; the run aborted."""


@dataclass
class SimTrace:
    """Column store of one run plus metadata needed by the metric suite."""

    columns: dict[str, np.ndarray]
    scenario: Scenario
    segment_boundaries: list[float]
    manifest_hash: str
    flags: dict

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def n_steps(self) -> int:
        return len(self.columns["t"])

    def to_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(f"# manifest: {self.manifest_hash}\n")
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            cols = [self.columns[c] for c in TRACE_COLUMNS]
            for i in range(self.n_steps):
                fh.write(",".join(repr(float(col[i])) for col in cols) + "\n")


def _plant_step(state: PlantState, omega: float, t: float, dt: float,
                scn: Scenario, slope_force: float,
                substep_factor: int = 1) -> PlantState:
    """RK4 over one control period with the steering rate held.

    The slip relaxation rate scales as C/(m v), so the step is subdivided
    whenever that rate approaches the RK4 stability bound at low speed.
    substep_factor refines the integration further without touching the
    control timing (step-size convergence checks).
    """
    p = scn.truth_params
    v_bar = floored_speed(scn.speed.v(t), p)
    lam = max((p.C_f + p.C_r) / (p.m * v_bar),
              (p.C_f * p.L_f ** 2 + p.C_r * p.L_r ** 2) / (p.J * v_bar))
    n_sub = max(1, math.ceil(dt * lam / 2.2)) * max(1, substep_factor)
    h = dt / n_sub
    d = scn.disturbances

    def deriv(beta: float, r: float, phi: float, x: float, y: float,
              theta: float, tau: float) -> tuple[float, float, float, float, float, float]:
        st = PlantState(beta=beta, r=r, phi=phi, x=x, y=y, theta=theta,
                        v=scn.speed.v(tau))
        b_dot, r_dot, x_dot, y_dot, th_dot = nonlinear_truth_deriv(st, p, slope_force)
        b_dot += d.delta_beta
        r_dot += d.delta_r
        if (phi >= dynamic.PHI_MAX and omega > 0.0) or (phi <= -dynamic.PHI_MAX and omega < 0.0):
            phi_dot = 0.0
        else:
            phi_dot = omega
        return b_dot, r_dot, phi_dot, x_dot, y_dot, th_dot

    beta, r, phi = state.beta, state.r, state.phi
    x, y, theta = state.x, state.y, state.theta
    tau = t
    for _ in range(n_sub):
        k1 = deriv(beta, r, phi, x, y, theta, tau)
        k2 = deriv(beta + 0.5 * h * k1[0], r + 0.5 * h * k1[1], phi + 0.5 * h * k1[2],
                   x + 0.5 * h * k1[3], y + 0.5 * h * k1[4], theta + 0.5 * h * k1[5],
                   tau + 0.5 * h)
        k3 = deriv(beta + 0.5 * h * k2[0], r + 0.5 * h * k2[1], phi + 0.5 * h * k2[2],
                   x + 0.5 * h * k2[3], y + 0.5 * h * k2[4], theta + 0.5 * h * k2[5],
                   tau + 0.5 * h)
        k4 = deriv(beta + h * k3[0], r + h * k3[1], phi + h * k3[2],
                   x + h * k3[3], y + h * k3[4], theta + h * k3[5], tau + h)
        beta += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        r += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        phi += h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        x += h / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        y += h / 6.0 * (k1[4] + 2 * k2[4] + 2 * k3[4] + k4[4])
        theta += h / 6.0 * (k1[5] + 2 * k2[5] + 2 * k3[5] + k4[5])
        tau += h
    phi = min(max(phi, -dynamic.PHI_MAX), dynamic.PHI_MAX)
    if not all(map(math.isfinite, (beta, r, phi, x, y, theta))):
        raise NonFiniteStateError(f"plant state non-finite at t={t:.2f}")
    return PlantState(beta=beta, r=r, phi=phi, x=x, y=y,
                      theta=wrap_angle(theta), v=scn.speed.v(t + dt))


def run(scn: Scenario, obs_init: tuple[float, float] | None = None,
        plant_substeps: int = 1) -> SimTrace:
    """Simulate one scenario to path end (or duration); returns the trace.

    plant_substeps refines the truth-plant integration below the fixed
    control period (used by step-size convergence checks).
    """
    if obs_init is None:
        obs_init = scn.observer_init
    path = scn.build_path()
    rng = np.random.default_rng(scn.seed)
    model = scn.model_params
    kin = scn.kin_gains
    dyn_gains = dynamic.tune_dyn_gains(model, scn.speed_range, scn.dyn_T_s)
    d = scn.disturbances
    slope_force = scn.truth_params.m * GRAVITY * math.sin(math.atan(d.slope_grade))

    # Place the vehicle at the stated posture error, slightly inside the path
    # start so the anchored frame has room behind it under measurement noise;
    # positive y_e0 sits on the clockwise side of the tangent.
    s_start = min(0.5, 0.01 * path.total_length)
    p0 = path.sample(s_start)
    x0 = p0.x + scn.y_e0 * math.sin(p0.theta)
    y0 = p0.y - scn.y_e0 * math.cos(p0.theta)
    theta0 = wrap_angle(p0.theta - scn.theta_e0)
    state = PlantState(beta=0.0, r=0.0, phi=0.0, x=x0, y=y0, theta=theta0,
                       v=scn.speed.v(0.0))
    err = initial_error_state(path, x0, y0, theta0, state.v, alpha_r=0.0,
                              s_guess=s_start)

    # Optionally re-anchor the gain ramp start on the initial posture.
    if scn.c0_mode == "solve" and scn.controller in ("PROP", "PROP-S"):
        v_bar0 = floored_speed(state.v, model)
        c0 = kinematic.c0_from_initial_posture(kin, err.y_e, err.theta_e, v_bar0)
        if c0 is not None:
            kin = replace(kin, c0=c0)

    obs_cfg = scn.observer
    obs = obsmod.HgoState(r_hat=obs_init[0], beta_hat=obs_init[1])
    dstate = dynamic.DynCtlState()
    a_state = baselines.BaselineAState()
    a_gains = baselines.tune_baseline_a(model) if scn.controller == "A" else None
    b_state = baselines.BaselineBState()
    sched_flags = kinematic.ScheduleFlags()

    yaw_std = d.yaw_noise_std
    pose_std = d.pose_noise_std
    y_meas = state.r + (rng.normal(0.0, yaw_std) if yaw_std > 0.0 else 0.0)
    kicked = d.kick_time is None
    r_dot_kin_prev = 0.0
    have_prev_rate = False

    cols: dict[str, list[float]] = {name: [] for name in TRACE_COLUMNS}
    t = 0.0
    if scn.duration is not None:
        t_max = scn.duration
    else:
        t_max = 30.0 + path.total_length / max(0.5, 0.5 * scn.speed.v_max)
    n_max = int(round(t_max / scn.dt))

    for _ in range(n_max):
        v = state.v
        v_bar = floored_speed(v, model)
        v_bar_dot = scn.speed.v_dot(t) if v > model.v_eps else 0.0
        coeffs = dyn_coeffs(model, v)
        truth_deriv = nonlinear_truth_deriv(state, scn.truth_params, slope_force)
        alpha_f_true, alpha_r_true = tire_slip_angles(
            state.beta, state.r, state.phi, v, scn.truth_params)

        if scn.feedback == "state":
            r_hat, beta_hat = state.r, state.beta
            beta_hat_dot = truth_deriv[0]
        else:
            r_hat, beta_hat = obs.r_hat, obs.beta_hat
            _, beta_hat_dot = obsmod.observer_rates(obs, y_meas, state.phi, coeffs, obs_cfg)

        # Error model (measured pose; noiseless unless the terrain stand-in is on).
        if pose_std > 0.0:
            mx = state.x + rng.normal(0.0, pose_std)
            my = state.y + rng.normal(0.0, pose_std)
        else:
            mx, my = state.x, state.y
        if scn.feedback == "state":
            alpha_r_est = alpha_r_true
        else:
            try:
                alpha_r_est = resolve_rear_slip(beta_hat, model, v)
            except SingularSpeedError:
                alpha_r_est = 0.0
        if cols["t"]:  # the first pass keeps the freshly initialized state
            err = update_reference(path, (mx, my, state.theta), v, err, scn.dt,
                                   alpha_r_est)

        theta_bar_e = err.theta_e + kin.K_F * beta_hat
        delta_ar = (0.0 if scn.controller in ("A", "B")
                    else sideslip_perturbation(err.kappa_ref, model, v_bar))

        r_thresh = kinematic.r_threshold(kin, model.mu, v_bar)
        S_val = rho_val = c_now = 0.0
        r_raw = r_cmd = r_dot_kin = 0.0
        clipped = False
        phi_des = float("nan")
        if scn.controller in ("PROP", "PROP-S"):
            c_now, c_dot = kinematic.schedule_c(
                kin, t, err.y_e, theta_bar_e, v_bar, model.mu, delta_ar,
                mode=scn.c_mode, flags=sched_flags)
            ev = kinematic.eval_manifold(err.y_e, theta_bar_e, err.sigma_k,
                                         kin, c_now, c_dot, v_bar, delta_ar)
            mode = "PROP" if scn.controller == "PROP" else "PROP_S"
            r_raw, r_cmd, clipped = kinematic.yaw_command(
                ev, kin, err.kappa_ref, v_bar, mode=mode, mu=model.mu)
            if clipped:
                r_dot_kin = 0.0  # the tracked signal is pinned at the bound
            else:
                r_dot_kin = kinematic.yaw_command_rate(
                    ev, kin, err.kappa_ref, err.dkappa_ds, v_bar, v_bar_dot,
                    err.y_e, theta_bar_e, delta_ar, r_hat, beta_hat_dot, err.v_ref)
            # One-step difference of the analytic rate, bounded so saturation
            # corners and curvature jumps cannot demand more steering-rate
            # anticipation than the actuator could ever express.
            if have_prev_rate:
                cap = dynamic.OMEGA_MAX * coeffs.b21
                r_ddot_kin = min(max((r_dot_kin - r_dot_kin_prev) / scn.dt,
                                     -cap), cap)
            else:
                r_ddot_kin = 0.0
            r_dot_kin_prev, have_prev_rate = r_dot_kin, True
            phi_des, r_e = dynamic.desired_steering(
                beta_hat, r_cmd, r_dot_kin, r_hat, dstate, coeffs, dyn_gains)
            phi_sat = abs(phi_des) >= dynamic.PHI_MAX - 1e-12
            phi_e = phi_des - state.phi
            r_e_dot = dynamic.yaw_error_model_rate(r_e, dstate.sigma_r, phi_e,
                                                   coeffs, dyn_gains)
            omega = dynamic.steering_rate(beta_hat_dot, r_dot_kin, r_ddot_kin,
                                          r_e, r_e_dot, phi_e, dstate, coeffs,
                                          dyn_gains)
            omega_sat = abs(omega) >= dynamic.OMEGA_MAX - 1e-12
            dynamic.advance_integrators(dstate, r_e, phi_e, scn.dt, phi_sat, omega_sat)
            S_val, rho_val = ev.S_kin, ev.rho_kin
        elif scn.controller == "B":
            c_now, c_dot = kinematic.schedule_c(
                kin, t, err.y_e, err.theta_e, v_bar, model.mu, 0.0,
                mode=scn.c_mode, flags=sched_flags)
            bk = baselines.baseline_b_kinematic(err, err.sigma_k, kin, c_now,
                                                c_dot, v_bar, v_bar_dot, r_hat,
                                                err.v_ref)
            r_raw = r_cmd = bk.r_cmd
            r_dot_kin = bk.r_cmd_dot
            omega = baselines.baseline_b_dynamic(bk, r_hat, beta_hat, state.phi,
                                                 b_state, coeffs, dyn_gains)
            omega_sat = abs(omega) >= dynamic.OMEGA_MAX - 1e-12
            phi_sat = False
            S_val, rho_val, phi_des = bk.S, bk.rho, b_state.phi_des
        else:  # Baseline A
            omega, r_cmd = baselines.baseline_a_step(err, y_meas, state.phi,
                                                     a_gains, a_state, scn.dt)
            r_raw = r_cmd
            omega_sat = abs(omega) >= dynamic.OMEGA_MAX - 1e-12
            phi_sat = False

        a_y = (scn.speed.v_dot(t) * math.sin(state.beta)
               + v * math.cos(state.beta) * (truth_deriv[0] + state.r))
        a_y_ref = err.kappa_ref * err.v_ref * err.v_ref
        v_B = v * math.cos(state.beta) / math.cos(alpha_r_true)

        if err.at_path_end:
            break  # the anchored frame would clamp past the endpoint

        row = (t, err.s_ref, state.x, state.y, state.theta, v, state.beta,
               state.r, state.phi, alpha_r_true, v_B, y_meas, r_hat, beta_hat,
               err.y_e, err.theta_e, theta_bar_e, err.sigma_k, err.v_ref,
               err.kappa_ref, err.x_resid, c_now, S_val, rho_val, r_raw, r_cmd,
               float(clipped), phi_des, omega, float(omega_sat),
               float(abs(state.phi) >= dynamic.PHI_MAX - 1e-12), a_y, a_y_ref,
               r_thresh)
        for name, value in zip(TRACE_COLUMNS, row):
            cols[name].append(value)

        state = _plant_step(state, omega, t, scn.dt, scn, slope_force,
                            substep_factor=plant_substeps)
        t += scn.dt
        if not kicked and d.kick_time is not None and t >= d.kick_time:
            state = replace(state,
                            x=state.x + d.kick_y * math.sin(state.theta),
                            y=state.y - d.kick_y * math.cos(state.theta))
            kicked = True

        y_meas = state.r + (rng.normal(0.0, yaw_std) if yaw_std > 0.0 else 0.0)
        if scn.feedback == "output":
            obs = obsmod.hgo_multi_step(obs, y_meas, state.phi,
                                        dyn_coeffs(model, state.v), obs_cfg,
                                        scn.dt)

    arrays = {k: np.asarray(v) for k, v in cols.items()}
    return SimTrace(columns=arrays, scenario=scn,
                    segment_boundaries=path.segment_boundaries(),
                    manifest_hash=scn.manifest_hash(),
                    flags={"safety_violation": sched_flags.safety_violation,
                           "cap_bound": sched_flags.cap_bound,
                           "reached_path_end": bool(err.at_path_end)})


@dataclass
class RunFailure:
    scenario: Scenario
    error: str


def batch(scenarios: list[Scenario], workers: int = 1) -> list[SimTrace | RunFailure]:
    """Run scenarios independently; failures are recorded, not raised.

    Results are joined in scenario order regardless of worker count.
    """
    def guarded(scn: Scenario):
        try:
            return run(scn)
        except Exception as exc:  # per-run isolation is the contract
            return RunFailure(scenario=scn, error=f"{type(exc).__name__}: {exc}")

    if workers <= 1:
        return [guarded(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(guarded, scenarios))
