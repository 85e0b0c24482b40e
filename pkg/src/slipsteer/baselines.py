"""Baseline steering controllers used for head-to-head comparison.

Baseline A is a cascaded PID: an outer loop maps lateral error (with a
heading damping term) to a yaw-rate command, an inner loop maps yaw-rate
error to steering rate.  Baseline B is the earlier robust design this
work descends from: same manifold scaffolding but no slip compensation,
no command saturation, and a dynamic tier without integral action.  B's
equations are kept exactly in their original form, which measures errors
as actual-minus-reference, so its inputs are negated relative to the
error frame used elsewhere in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dynamic import OMEGA_MAX, DynGains
from .errors import ErrorState
from .kinematic import KinGains, sat
from .vehicle import DynCoeffs, VehicleParams, dyn_coeffs


@dataclass(frozen=True)
class BaselineAGains:
    """Cascaded PID gains with derivative filter time constants."""

    y_kp: float
    y_ki: float
    y_kd: float
    theta_kp: float      # heading damping in the outer loop
    r_kp: float
    r_ki: float
    r_kd: float
    d_tau: float = 0.1   # derivative filter time constant, s
    r_cmd_limit: float = 1.0
    sigma_limit: float = 2.0

    def __post_init__(self) -> None:
        for name in ("y_kp", "y_ki", "y_kd", "theta_kp", "r_kp", "r_ki", "r_kd"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


@dataclass
class BaselineAState:
    sigma_y: float = 0.0
    sigma_r: float = 0.0
    y_prev: float = 0.0
    re_prev: float = 0.0
    dy_filt: float = 0.0
    dre_filt: float = 0.0
    primed: bool = False


def tune_baseline_a(params: VehicleParams, v_outer: float = 7.0,
                    v_inner: float = 10.0, T_s_outer: float = 4.0) -> BaselineAGains:
    """Pole placement realizing the stated tuning targets.

    Outer loop: a well-damped pair for a T_s_outer step settling at
    v_outer with a slow integrator pole; the extra damping absorbs the lag
    of the inner loop, which runs only twice as fast.  Inner loop designed
    at v_inner against the linear yaw channel.
    """
    wn = 4.0 / T_s_outer
    zeta = 1.4
    p_i = 0.12 * wn
    theta_kp = 2.0 * zeta * wn + p_i
    y_kp = (wn * wn + 2.0 * zeta * wn * p_i) / v_outer
    y_ki = wn * wn * p_i / v_outer

    coeffs = dyn_coeffs(params, v_inner)
    wn2 = 2.0 * wn
    a22_mag = abs(coeffs.a22)
    # With the plant's own yaw damping, a derivative term is only needed if
    # the requested bandwidth exceeds it.
    r_kd = max(0.0, (2.0 * wn2 + 5.0 * wn2 + coeffs.a22) / coeffs.b21)
    p2 = max(a22_mag + coeffs.b21 * r_kd - 2.0 * wn2, wn2)
    r_kp = (wn2 * wn2 + 2.0 * wn2 * p2) / coeffs.b21
    r_ki = wn2 * wn2 * p2 / coeffs.b21
    return BaselineAGains(y_kp=y_kp, y_ki=y_ki, y_kd=0.0, theta_kp=theta_kp,
                          r_kp=r_kp, r_ki=r_ki, r_kd=r_kd)


def baseline_a_step(err: ErrorState, r_meas: float, phi_act: float,
                    gains: BaselineAGains, state: BaselineAState,
                    dt: float) -> tuple[float, float]:
    """One PID cascade update; returns (steering-rate command, yaw command)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if not state.primed:
        state.y_prev = err.y_e
        state.re_prev = 0.0
        state.primed = True
    dy_raw = (err.y_e - state.y_prev) / dt
    state.dy_filt += (dy_raw - state.dy_filt) * min(1.0, dt / gains.d_tau)
    r_cmd_raw = (gains.y_kp * err.y_e + gains.y_ki * state.sigma_y
                 + gains.y_kd * state.dy_filt + gains.theta_kp * err.theta_e)
    r_cmd = sat(r_cmd_raw, gains.r_cmd_limit)
    if r_cmd == r_cmd_raw:
        state.sigma_y = sat(state.sigma_y + dt * err.y_e, gains.sigma_limit)
    state.y_prev = err.y_e

    r_e = r_cmd - r_meas
    dre_raw = (r_e - state.re_prev) / dt
    state.dre_filt += (dre_raw - state.dre_filt) * min(1.0, dt / gains.d_tau)
    omega_raw = gains.r_kp * r_e + gains.r_ki * state.sigma_r + gains.r_kd * state.dre_filt
    omega = sat(omega_raw, OMEGA_MAX)
    if omega == omega_raw:
        state.sigma_r = sat(state.sigma_r + dt * r_e, gains.sigma_limit)
    state.re_prev = r_e
    return omega, r_cmd


# --- Baseline B -----------------------------------------------------------

@dataclass
class BaselineBState:
    """Last desired steering angle, kept for diagnostics."""

    phi_des: float = 0.0


@dataclass(frozen=True)
class BKinEval:
    """Kinematic command of baseline B plus its analytic rate inputs."""

    S: float
    rho: float
    r_cmd: float
    r_cmd_dot: float


def baseline_b_kinematic(err: ErrorState, sigma_k: float, gains: KinGains,
                         c_now: float, c_dot: float, v_bar: float,
                         v_bar_dot: float, r_now: float,
                         v_ref: float) -> BKinEval:
    """Yaw-rate command of the earlier robust baseline, with analytic rate.

    Works in the design's original error sense (actual minus reference):
    inputs are negated up front and the formulas applied verbatim.  There
    is no slip compensation and the path feedforward lives inside the
    robust gain.
    """
    yp = -err.y_e
    thp = -err.theta_e
    sp = -sigma_k
    kappa = err.kappa_ref
    K_i = gains.K_i

    u = (c_now * yp + K_i * sp) / v_bar
    u_sat = sat(u, gains.a1)
    saturated = u_sat != u
    root = math.sqrt(1.0 - u_sat * u_sat)
    S = math.asin(u_sat) + thp

    yp_dot = v_bar * math.sin(thp)           # the baseline's nonslip belief
    thp_dot = r_now - kappa * v_ref
    P = c_dot * yp + c_now * math.sin(thp) + K_i * yp / v_bar
    M = -kappa * v_bar + P / root
    rho = abs(M)
    T = math.tanh(S / gains.eps_kin)
    r_cmd = -(rho + gains.psi_kin) * T

    # Analytic rate of the command.
    u_dot = 0.0 if saturated else (c_dot * yp + c_now * yp_dot + K_i * yp) / v_bar - u * v_bar_dot / v_bar
    S_dot = thp_dot + (0.0 if saturated else u_dot / root)
    P_dot = (c_dot * yp_dot + c_dot * math.sin(thp) + c_now * math.cos(thp) * thp_dot
             + K_i * yp_dot / v_bar - K_i * yp * v_bar_dot / (v_bar * v_bar))
    root_dot = 0.0 if saturated else -u_sat * u_dot / root
    kappa_dot = err.dkappa_ds * v_ref
    M_dot = -kappa_dot * v_bar - kappa * v_bar_dot + P_dot / root - P * root_dot / (root * root)
    rho_dot = (0.0 if M == 0.0 else math.copysign(1.0, M)) * M_dot
    sech2 = 1.0 - T * T
    r_cmd_dot = -(rho_dot * T + (rho + gains.psi_kin) * sech2 * S_dot / gains.eps_kin)
    return BKinEval(S=S, rho=rho, r_cmd=r_cmd, r_cmd_dot=r_cmd_dot)


def baseline_b_dynamic(kin: BKinEval, r_hat: float, beta_hat: float,
                       phi_act: float, state: BaselineBState,
                       coeffs: DynCoeffs, gains: DynGains) -> float:
    """Steering-rate command of the earlier baseline's dynamic tier.

    Pure proportional structure in its original error sense
    (r_e = estimate - reference, phi_e = actual - desired); no integral
    states.
    """
    r_ref = kin.r_cmd
    r_ref_dot = kin.r_cmd_dot
    r_e = r_hat - r_ref
    phi_des = -(coeffs.a21 * beta_hat + coeffs.a22 * r_ref - r_ref_dot
                + gains.K_p1 * r_e) / coeffs.b21
    state.phi_des = phi_des
    phi_e = phi_act - phi_des
    omega = (-(coeffs.a21 * beta_hat + coeffs.a22 * r_ref_dot - r_ref_dot
               + gains.K_p1 * r_e + coeffs.b21 * r_e) / coeffs.b21
             - gains.K_p2 * phi_e)
    return sat(omega, OMEGA_MAX)
