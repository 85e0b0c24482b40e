"""Bicycle-model vehicle: parameters, slip-yaw coefficients, and plants.

Two plants live here.  The linear slip-yaw model is what the controllers
are derived from; the nonlinear force-balance plant is what the simulator
integrates, so the linearization residuals act on the closed loop as real
model mismatch instead of injected noise.

Sign conventions used throughout the package:
  * heading theta is CCW-positive in the global x-y plane,
  * positive curvature / yaw rate is a left turn,
  * lateral error y_e is measured along the path-frame lateral axis that
    points 90 deg clockwise from the tangent, i.e. y_e > 0 when the
    vehicle sits to the right of the path,
  * positive steering gives negative tire slip angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

GRAVITY = 9.81  # m/s^2


class SingularSpeedError(ValueError):
    """Rear-slip resolution hit the speed where its denominator vanishes."""


@dataclass(frozen=True)
class VehicleParams:
    """Mass, geometry, and tire properties of the bicycle model."""

    m: float            # mass, kg
    J: float            # yaw inertia, kg m^2
    L_f: float          # CG to front axle, m
    L_r: float          # CG to rear axle, m
    C_f: float          # front cornering stiffness, N/rad
    C_r: float          # rear cornering stiffness, N/rad
    mu: float = 0.8     # road-tire friction coefficient
    v_eps: float = 0.5  # floor speed used in 1/v coefficients, m/s

    def __post_init__(self) -> None:
        for name in ("m", "J", "L_f", "L_r", "C_f", "C_r", "v_eps"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if not 0.0 < self.mu <= 1.5:
            raise ValueError("mu must be in (0, 1.5]")

    @property
    def L(self) -> float:
        """Wheelbase, m (derived, never stored)."""
        return self.L_f + self.L_r

    def scaled(self, mu: float | None = None, stiffness_scale: float = 1.0) -> "VehicleParams":
        """Copy with modified friction and/or cornering stiffness (weather presets)."""
        return VehicleParams(
            m=self.m, J=self.J, L_f=self.L_f, L_r=self.L_r,
            C_f=self.C_f * stiffness_scale, C_r=self.C_r * stiffness_scale,
            mu=self.mu if mu is None else mu, v_eps=self.v_eps,
        )


# Design values of the test vehicle (a full-size minivan class platform).
NOMINAL_PARAMS = VehicleParams(m=2540.0, J=5000.0, L_f=1.5, L_r=1.5,
                               C_f=230e3, C_r=200e3, mu=0.8)
# Deliberately perturbed set used to evaluate robustness.
ESTIMATED_PARAMS = VehicleParams(m=2300.0, J=4500.0, L_f=1.4, L_r=1.6,
                                 C_f=110e3, C_r=110e3, mu=0.8)


@dataclass(frozen=True)
class DynCoeffs:
    """Speed-dependent coefficients of the linear slip-yaw model."""

    a11: float
    a12: float
    a21: float
    a22: float
    b11: float
    b21: float
    v_bar: float  # the floored speed the coefficients were evaluated at


@dataclass
class PlantState:
    """Truth state: slip-yaw dynamics plus global rear-axle pose."""

    beta: float   # sideslip at CG, rad
    r: float      # yaw rate, rad/s
    phi: float    # steering angle, rad
    x: float      # rear axle position, m
    y: float      # rear axle position, m
    theta: float  # heading, rad, wrapped to (-pi, pi]
    v: float      # CG speed, m/s (follows the scripted profile)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def floored_speed(v: float, params: VehicleParams) -> float:
    return v if v > params.v_eps else params.v_eps


def dyn_coeffs(params: VehicleParams, v: float) -> DynCoeffs:
    """Linear slip-yaw model coefficients at speed ``v`` (floored by v_eps)."""
    vb = floored_speed(v, params)
    m, J, Lf, Lr, Cf, Cr = params.m, params.J, params.L_f, params.L_r, params.C_f, params.C_r
    return DynCoeffs(
        a11=-(Cf + Cr) / (m * vb),
        a12=-(1.0 + (Cf * Lf - Cr * Lr) / (m * vb * vb)),
        a21=-(Cf * Lf - Cr * Lr) / J,
        a22=-(Cf * Lf * Lf + Cr * Lr * Lr) / (J * vb),
        b11=Cf / (m * vb),
        b21=Cf * Lf / J,
        v_bar=vb,
    )


def linear_slip_yaw_deriv(beta: float, r: float, phi: float, coeffs: DynCoeffs,
                          delta_beta: float = 0.0, delta_r: float = 0.0) -> tuple[float, float]:
    """(beta_dot, r_dot) of the linear slip-yaw model with additive disturbances."""
    beta_dot = coeffs.a11 * beta + coeffs.a12 * r + coeffs.b11 * phi + delta_beta
    r_dot = coeffs.a21 * beta + coeffs.a22 * r + coeffs.b21 * phi + delta_r
    return beta_dot, r_dot


def tire_slip_angles(beta: float, r: float, phi: float, v: float,
                     params: VehicleParams) -> tuple[float, float]:
    """Geometric front/rear tire slip angles; forced to zero below v_eps."""
    if v < params.v_eps:
        return 0.0, 0.0
    vx = v * math.cos(beta)
    vy = v * math.sin(beta)
    alpha_f = math.atan2(vy + params.L_f * r, vx) - phi
    alpha_r = math.atan2(vy - params.L_r * r, vx)
    return alpha_f, alpha_r


def nonlinear_truth_deriv(state: PlantState, params: VehicleParams,
                          slope_force: float = 0.0) -> tuple[float, float, float, float, float]:
    """Truth-plant derivatives (beta_dot, r_dot, x_dot, y_dot, theta_dot).

    Lateral force balance with cornering-stiffness tires; planar rigid
    body, longitudinal tire forces zero (speed is scripted).  slope_force
    is an additive lateral force at the CG, used for grade disturbances.
    Steering-rate input is applied by the caller through phi.
    """
    v = state.v
    vb_floor = floored_speed(v, params)
    alpha_f, alpha_r = tire_slip_angles(state.beta, state.r, state.phi, v, params)
    F_yf = -params.C_f * alpha_f
    F_yr = -params.C_r * alpha_r
    cos_beta = math.cos(state.beta)
    beta_dot = (F_yf * math.cos(state.phi) + F_yr + slope_force) / (params.m * vb_floor * cos_beta) - state.r
    r_dot = (params.L_f * F_yf * math.cos(state.phi) - params.L_r * F_yr) / params.J
    # Rear-axle pose kinematics; the rear axle travels at v_B along theta + alpha_r.
    v_B = v * cos_beta / math.cos(alpha_r)
    course = state.theta + alpha_r
    x_dot = v_B * math.cos(course)
    y_dot = v_B * math.sin(course)
    return beta_dot, r_dot, x_dot, y_dot, state.r


def rear_axle_speed(state: PlantState, params: VehicleParams) -> float:
    """v_B = v cos(beta)/cos(alpha_r); equals v up to second order in the angles."""
    _, alpha_r = tire_slip_angles(state.beta, state.r, state.phi, state.v, params)
    return state.v * math.cos(state.beta) / math.cos(alpha_r)


def resolve_rear_slip(beta: float, params: VehicleParams, v: float) -> float:
    """Rear tire slip angle implied by sideslip ``beta`` in steady cornering."""
    vb = floored_speed(v, params)
    denom = params.C_r * params.L * params.L_r / (params.m * vb * vb * params.L_f) - 1.0
    if abs(denom) < 1e-9:
        raise SingularSpeedError(
            f"rear-slip resolution singular near v={vb:.3f} m/s for these parameters")
    return -beta / denom


def max_curvature(v: float, params: VehicleParams) -> float:
    """Comfort/steering bound on path curvature at speed ``v``, 1/m."""
    vb = floored_speed(v, params)
    return min(0.03, 3.13 / (vb * vb))


def sideslip_perturbation(kappa: float, params: VehicleParams, v: float) -> float:
    """Residual of the sideslip-based rear-slip compensation at curvature ``kappa``.

    Positive at low speed (compensation slightly overshoots, tightening
    tracking) and negative at high speed (compensation goes cautious);
    crosses zero where C_r L L_r = 2 m v^2 L_f.
    """
    vb = floored_speed(v, params)
    return (kappa / (params.C_r * params.L)) * (
        params.C_r * params.L * params.L_r - 2.0 * params.m * vb * vb * params.L_f)


def steady_state_sideslip(kappa: float, params: VehicleParams, v: float) -> float:
    """Steady cornering sideslip at curvature ``kappa`` (small-angle model)."""
    vb = floored_speed(v, params)
    return (kappa / (params.C_r * params.L)) * (
        params.C_r * params.L * params.L_r - params.m * vb * vb * params.L_f)
