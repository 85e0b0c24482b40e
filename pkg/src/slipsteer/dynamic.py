"""Yaw-tracking and backstepping steering-rate control.

The yaw loop turns the kinematic yaw-rate command into a steering angle
through the inverse of the linear slip-yaw model, with PI action on the
yaw error.  The steering loop extends that design through the actuator
integrator so the commanded quantity is steering *rate*.

The composite quadratic storage of (r_e, sigma_r, phi_e, sigma_phi) is
non-increasing against the linear plant provided the proportional gains
dominate the steering-to-yaw cross coupling:

    4 (K_p1 + |a22|) K_p2 >= (b21 - 1)^2

tune_dyn_gains enforces this alongside the usual K_p > |a22| margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .vehicle import DynCoeffs, VehicleParams, dyn_coeffs

PHI_MAX = math.radians(35.0)   # steering angle hard limit
OMEGA_MAX = 0.3                # steering rate hard limit, rad/s


class GainDesignError(ValueError):
    """Requested loop speeds cannot be realized within actuator limits."""


@dataclass(frozen=True)
class DynGains:
    """PI gains of the yaw and steering loops."""

    K_p1: float
    K_i1: float
    K_p2: float
    K_i2: float
    omega_yaw: float = 0.0    # placed natural frequency of the yaw pair
    omega_steer: float = 0.0  # placed natural frequency of the steering pair

    def validate(self, params: VehicleParams, speed_range: tuple[float, float]) -> None:
        a22_max = max(abs(dyn_coeffs(params, v).a22) for v in speed_range)
        if self.K_p1 <= a22_max or self.K_p2 <= a22_max:
            raise GainDesignError(
                f"proportional gains must exceed max |a22| = {a22_max:.2f} over the speed range")
        if self.K_i1 <= 0.0 or self.K_i2 <= 0.0:
            raise GainDesignError("integral gains must be positive")


@dataclass
class DynCtlState:
    """Integrators and last outputs of the dynamic tier."""

    sigma_r: float = 0.0
    sigma_phi: float = 0.0
    r_e: float = 0.0
    phi_e: float = 0.0
    phi_des: float = 0.0


def tune_dyn_gains(params: VehicleParams, speed_range: tuple[float, float],
                   T_s_target: float = 1.0) -> DynGains:
    """Critically damped PI placement for both loops.

    T_s_target is the steering-loop settling target; the yaw loop is
    placed at half that speed.  Proportional gains are floored above the
    largest yaw-damping coefficient in the speed range, which can speed
    the loops past their requested placement on strongly damped plants.
    Raises if the placement cannot track a nominal mid-range yaw command
    within the actuator rate limit.
    """
    v_lo, v_hi = speed_range
    if v_lo <= 0.0 or v_hi < v_lo:
        raise ValueError("speed_range must be positive and ordered")
    a22_lo = abs(dyn_coeffs(params, v_lo).a22)
    a22_hi = abs(dyn_coeffs(params, v_hi).a22)
    b21 = dyn_coeffs(params, v_hi).b21

    omega_steer = 4.0 / T_s_target
    omega_yaw = 4.0 / (2.0 * T_s_target)

    # Integral gains carry the placed frequencies; proportional gains take the
    # critically damped value unless the plant's own yaw damping exceeds it,
    # in which case they floor just above it (overdamped, never oscillatory).
    # Tying the integral gains to the large damping floor instead would wind
    # up against the rate-limited actuator.
    K_p1 = max(2.0 * omega_yaw, 1.05 * a22_lo)
    K_i1 = omega_yaw ** 2
    K_p2 = max(2.0 * omega_steer, 1.05 * a22_lo,
               1.05 * (b21 - 1.0) ** 2 / (4.0 * (K_p1 + a22_hi)))
    K_i2 = omega_steer ** 2

    # Feasibility: a nominal yaw-rate step at the design point must not demand
    # a steering angle beyond the actuator range.
    coeffs = dyn_coeffs(params, v_hi)
    phi_nominal = abs((abs(coeffs.a22) * 0.1 + K_p1 * 0.1) / coeffs.b21)
    if phi_nominal > PHI_MAX:
        raise GainDesignError(
            f"placed gains demand {phi_nominal:.2f} rad steering for a 0.1 rad/s step")
    gains = DynGains(K_p1=K_p1, K_i1=K_i1, K_p2=K_p2, K_i2=K_i2,
                     omega_yaw=omega_yaw, omega_steer=omega_steer)
    gains.validate(params, speed_range)
    return gains


DEFAULT_DYN_GAINS_RANGE = (8.0, 10.0)


def desired_steering(beta_hat: float, r_kin: float, r_dot_kin: float,
                     r_dyn_hat: float, state: DynCtlState, coeffs: DynCoeffs,
                     gains: DynGains) -> tuple[float, float]:
    """Steering angle that tracks the yaw-rate command; returns (phi_des, r_e).

    Output is clamped to the steering range; the yaw-error integrator is
    advanced by the caller with anti-windup tied to that clamp.
    """
    r_e = r_kin - r_dyn_hat
    num = (coeffs.a21 * beta_hat - r_dot_kin + coeffs.a22 * r_kin
           - gains.K_p1 * r_e - gains.K_i1 * state.sigma_r)
    phi = -num / coeffs.b21
    if phi > PHI_MAX:
        phi = PHI_MAX
    elif phi < -PHI_MAX:
        phi = -PHI_MAX
    return phi, r_e


def yaw_error_model_rate(r_e: float, sigma_r: float, phi_e: float,
                         coeffs: DynCoeffs, gains: DynGains) -> float:
    """Internal model of r_e_dot under the yaw-tracking law.

    Substituting the steering law into the yaw error dynamics with
    phi_act = phi_des - phi_e gives the closed-loop rate used by the
    backstepping tier; the steering error couples in through b21.
    """
    return ((coeffs.a22 - gains.K_p1) * r_e - gains.K_i1 * sigma_r
            + coeffs.b21 * phi_e)


def steering_rate(beta_hat_dot: float, r_dot_kin: float, r_ddot_kin: float,
                  r_e_hat: float, r_e_dot_hat: float, phi_e: float,
                  state: DynCtlState, coeffs: DynCoeffs,
                  gains: DynGains) -> float:
    """Backstepping steering-rate command, clamped to the actuator limit.

    The command is the analytic rate of the desired steering angle plus the
    yaw-error coupling and PI action on the steering error; equivalently
    the numerator carries a (K_i1 + b21) r_e group before the division.
    """
    phi_des_dot = -(coeffs.a21 * beta_hat_dot - r_ddot_kin + coeffs.a22 * r_dot_kin
                    - gains.K_p1 * r_e_dot_hat - gains.K_i1 * r_e_hat) / coeffs.b21
    omega = (phi_des_dot + r_e_hat
             + gains.K_p2 * phi_e + gains.K_i2 * state.sigma_phi)
    if omega > OMEGA_MAX:
        return OMEGA_MAX
    if omega < -OMEGA_MAX:
        return -OMEGA_MAX
    return omega


def advance_integrators(state: DynCtlState, r_e: float, phi_e: float, dt: float,
                        phi_saturated: bool, omega_saturated: bool) -> None:
    """Trapezoidal integrator update with saturation anti-windup.

    Each integral freezes while its downstream command sits on a limit.
    """
    if not phi_saturated:
        state.sigma_r += 0.5 * dt * (state.r_e + r_e)
    if not omega_saturated:
        state.sigma_phi += 0.5 * dt * (state.phi_e + phi_e)
    state.r_e = r_e
    state.phi_e = phi_e
