"""Manifold-based continuous VSC kinematic controller.

Produces yaw-rate commands that drive lateral/heading error onto a path
manifold whose convergence gain c(t) is scheduled against time, speed,
and friction-based safety bounds.  Also exposes the numerical
verification helpers for the manifold design: the tracking-error Jacobian
at equilibrium, the boundary-layer Lyapunov-rate evaluation, and the
steering-rate saturation study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .vehicle import GRAVITY, VehicleParams


@dataclass(frozen=True)
class KinGains:
    """Kinematic-tier tuning set."""

    c0: float = 0.05          # initial convergence gain, 1/s
    c_ss: float = 3.0         # steady convergence gain, 1/s
    t_end: float = 4.0        # gain ramp horizon, s
    K_i: float = 0.1          # lateral-error integral gain
    psi_kin: float = 0.1      # robustness margin, rad/s
    eps_kin: float = 0.1      # tanh boundary-layer width
    a1: float = 0.9           # arcsin-argument saturation bound
    k1: float = 0.8           # friction fraction available for steering
    k2: float = 0.49          # fraction of that reserved for error correction
    K_F: float = 1.0          # sideslip feedforward gain into the heading error
    r_threshold_cap: float = math.inf  # optional extra yaw-command ceiling, rad/s

    def __post_init__(self) -> None:
        if not 0.0 < self.a1 < 1.0:
            raise ValueError("a1 must be in (0, 1)")
        if self.psi_kin <= 0.0 or self.eps_kin <= 0.0:
            raise ValueError("psi_kin and eps_kin must be positive")
        if not 0.0 < self.k2 < 1.0 or not 0.0 < self.k1 <= 1.0:
            raise ValueError("k1 in (0,1], k2 in (0,1) required")
        if self.c0 <= 0.0 or self.c_ss <= 0.0:
            raise ValueError("convergence gains must be positive")
        if self.K_i > self.c_ss / 10.0:
            raise ValueError("K_i must stay well below c_ss (K_i <= c_ss/10)")


# Parameter set used for the desk verification of the manifold design.
VERIFICATION_GAINS = KinGains(c0=0.65, c_ss=0.65, K_i=0.04, psi_kin=0.1, eps_kin=0.1)


@dataclass(frozen=True)
class ManifoldEval:
    """Manifold value and robust gain at one state."""

    S_kin: float
    rho_kin: float
    saturated: bool      # arcsin argument clipped at +-a1
    c_now: float
    c_dot: float
    u: float             # unclipped arcsin argument
    u_sat: float


def sat(x: float, bound: float) -> float:
    """Symmetric saturation that returns x untouched when inside the bound."""
    if x > bound:
        return bound
    if x < -bound:
        return -bound
    return x


def settling_estimates(c_now: float, v_bar: float) -> tuple[float, float]:
    """(98% settling time, settling distance) for convergence gain c_now."""
    if c_now <= 0.0:
        raise ValueError("c_now must be positive")
    T_s = 4.0 / c_now
    return T_s, v_bar * T_s


def k2_bound(kappa: float, v_bar: float, k1: float, mu: float) -> float:
    """Upper bound on k2 so the path feedforward fits inside the friction budget."""
    a_max = k1 * mu * GRAVITY
    return 1.0 - abs(kappa) * v_bar * v_bar / a_max


def safety_cap(gains: KinGains, v_bar: float, mu: float, y_e: float,
               theta_bar_e: float, delta_ar: float, c_dot: float) -> float:
    """Largest convergence gain that keeps lateral acceleration inside k1*k2*mu*g."""
    num = ((gains.k1 * gains.k2 * mu * GRAVITY - abs(v_bar * gains.psi_kin))
           * math.sqrt(1.0 - gains.a1 * gains.a1)
           - abs(gains.K_i * y_e) - abs(c_dot * y_e))
    den = abs(v_bar) * (abs(math.sin(theta_bar_e)) + abs(delta_ar))
    if num <= 0.0:
        return -math.inf
    if den < 1e-12:
        return math.inf
    return num / den


@dataclass
class ScheduleFlags:
    safety_violation: bool = False
    cap_bound: bool = False


def schedule_c(gains: KinGains, t: float, y_e: float, theta_bar_e: float,
               v_bar: float, mu: float, delta_ar: float,
               mode: str = "prop6", flags: ScheduleFlags | None = None) -> tuple[float, float]:
    """Convergence gain and its rate at time t.

    Modes: 'constant' holds c_ss, 'ramp' runs the linear transition alone,
    'prop6' additionally caps the ramp with the friction safety bound.  The
    returned rate is the ramp slope, zeroed once the ramp ends or the cap
    binds.
    """
    if t < gains.t_end:
        frac = t / gains.t_end
        c_lin = gains.c_ss * frac + gains.c0 * (1.0 - frac)
        c_dot = (gains.c_ss - gains.c0) / gains.t_end
    else:
        c_lin, c_dot = gains.c_ss, 0.0
    if mode == "constant":
        return gains.c_ss, 0.0
    if mode == "ramp":
        return c_lin, c_dot
    if mode != "prop6":
        raise ValueError(f"unknown c-schedule mode {mode!r}")
    c_safe = safety_cap(gains, v_bar, mu, y_e, theta_bar_e, delta_ar, c_dot)
    if c_safe <= 0.0:
        if flags is not None:
            flags.safety_violation = True
        return 0.05, 0.0
    if c_safe < c_lin:
        if flags is not None:
            flags.cap_bound = True
        return c_safe, 0.0
    return c_lin, c_dot


def c0_from_initial_posture(gains: KinGains, y_e0: float, theta_bar_e0: float,
                            v_bar: float, sigma_k0: float = 0.0) -> float | None:
    """Gain that places the manifold through the initial posture, if one exists.

    Solving S_kin = 0 for c requires y_e and theta_bar_e of opposite sign
    (phase-plane quadrants II/IV); otherwise returns None and the caller
    falls back to a small fixed c0.
    """
    if abs(y_e0) < 1e-9:
        return None
    arg = -math.sin(theta_bar_e0) * v_bar - gains.K_i * sigma_k0
    c0 = arg / y_e0
    if c0 <= 0.0 or abs((c0 * y_e0 + gains.K_i * sigma_k0) / v_bar) > gains.a1:
        return None
    return c0


def eval_manifold(y_e: float, theta_bar_e: float, sigma_k: float,
                  gains: KinGains, c_now: float, c_dot: float,
                  v_bar: float, delta_ar: float) -> ManifoldEval:
    """Manifold value S_kin and robust gain rho_kin at the current errors."""
    u = (c_now * y_e + gains.K_i * sigma_k) / v_bar
    u_sat = sat(u, gains.a1)
    saturated = u_sat != u
    S = theta_bar_e + math.asin(u_sat)
    y_e_dot = v_bar * math.sin(theta_bar_e) - v_bar * delta_ar
    num = c_dot * y_e + c_now * y_e_dot + gains.K_i * y_e
    den = v_bar * math.sqrt(1.0 - u_sat * u_sat)
    return ManifoldEval(S_kin=S, rho_kin=abs(num) / den, saturated=saturated,
                        c_now=c_now, c_dot=c_dot, u=u, u_sat=u_sat)


def r_threshold(gains: KinGains, mu: float, v_bar: float) -> float:
    """Yaw-rate saturation bound for the peaking-limited controller.

    The allowable-lateral-acceleration budget at the current speed; about
    0.3 rad/s at the 10 m/s design point with the wet-tuned fractions.  An
    optional fixed ceiling can tighten it further.
    """
    return min(gains.r_threshold_cap, gains.k1 * gains.k2 * mu * GRAVITY / v_bar)


def yaw_command(ev: ManifoldEval, gains: KinGains, kappa_ref: float,
                v_bar: float, mode: str = "PROP",
                mu: float = 0.8) -> tuple[float, float, bool]:
    """(raw command, output command, clipped?) for the kinematic tier.

    'PROP' passes the raw command through; 'PROP_S' saturates it at the
    speed- and friction-dependent yaw-rate threshold.
    """
    raw = kappa_ref * v_bar + (ev.rho_kin + gains.psi_kin) * math.tanh(ev.S_kin / gains.eps_kin)
    if mode in ("PROP", "prop"):
        return raw, raw, False
    if mode in ("PROP_S", "PROP-S", "prop_s", "prop-s"):
        bound = r_threshold(gains, mu, v_bar)
        out = sat(raw, bound)
        return raw, out, out != raw
    raise ValueError(f"unknown kinematic mode {mode!r}")


def yaw_command_rate(ev: ManifoldEval, gains: KinGains, kappa_ref: float,
                     dkappa_ds: float, v_bar: float, v_bar_dot: float,
                     y_e: float, theta_bar_e: float, delta_ar: float,
                     r_now: float, beta_hat_dot: float, v_ref: float) -> float:
    """Closed-form time derivative of the raw yaw-rate command.

    All terms of the command are differentiated analytically; the slip
    residual and the gain ramp are treated as slowly varying (their rates
    enter only through c_dot, with c_ddot = delta_ar_dot = 0).  r_now is
    the yaw rate used to propagate the heading error (the estimate in
    closed loop, the command itself in static command-field studies).
    """
    c, c_dot, K_i = ev.c_now, ev.c_dot, gains.K_i
    y_e_dot = v_bar * math.sin(theta_bar_e) - v_bar * delta_ar
    theta_bar_dot = kappa_ref * v_ref - r_now + gains.K_F * beta_hat_dot
    sigma_dot = y_e
    u_sat = ev.u_sat
    root = math.sqrt(1.0 - u_sat * u_sat)
    if ev.saturated:
        u_dot = 0.0
        S_dot = theta_bar_dot
    else:
        u_dot = (c_dot * y_e + c * y_e_dot + K_i * sigma_dot) / v_bar - ev.u * v_bar_dot / v_bar
        S_dot = theta_bar_dot + u_dot / root
    # rho = |N| / D with N, D as in eval_manifold
    N = c_dot * y_e + c * y_e_dot + K_i * y_e
    D = v_bar * root
    y_e_ddot = v_bar_dot * (math.sin(theta_bar_e) - delta_ar) + v_bar * math.cos(theta_bar_e) * theta_bar_dot
    N_dot = 2.0 * c_dot * y_e_dot + c * y_e_ddot + K_i * y_e_dot
    D_dot = v_bar_dot * root - v_bar * u_sat * u_dot / root
    sgn = 0.0 if N == 0.0 else math.copysign(1.0, N)
    rho_dot = sgn * N_dot / D - abs(N) * D_dot / (D * D)
    tanh_term = math.tanh(ev.S_kin / gains.eps_kin)
    sech2 = 1.0 - tanh_term * tanh_term
    kappa_dot = dkappa_ds * v_ref
    return (kappa_dot * v_bar + kappa_ref * v_bar_dot
            + rho_dot * tanh_term
            + (ev.rho_kin + gains.psi_kin) * sech2 * S_dot / gains.eps_kin)


def steering_saturation_region(gains: KinGains, params: VehicleParams,
                               v_bar: float, c: float,
                               y_grid: np.ndarray, theta_grid: np.ndarray,
                               omega_max: float = 0.3) -> np.ndarray:
    """Boolean grid marking (y_e, theta_e) states with unsaturated steering rate.

    Straight-path study: kappa_ref = 0, sigma_k = 0, no slip terms; the
    steering rate implied by the command field follows from the nonslip
    yaw/steering map omega = r_dot v L / (v^2 + r^2 L^2).
    """
    L = params.L
    out = np.zeros((len(y_grid), len(theta_grid)), dtype=bool)
    for i, y_e in enumerate(y_grid):
        for j, th in enumerate(theta_grid):
            ev = eval_manifold(y_e, th, 0.0, gains, c, 0.0, v_bar, 0.0)
            raw, _, _ = yaw_command(ev, gains, 0.0, v_bar, mode="PROP")
            r_dot = yaw_command_rate(ev, gains, 0.0, 0.0, v_bar, 0.0, y_e, th,
                                     0.0, raw, 0.0, v_bar)
            omega = r_dot * v_bar * L / (v_bar * v_bar + raw * raw * L * L)
            out[i, j] = abs(omega) <= omega_max
    return out


def tracking_error_jacobian(c: float, K_i: float, psi_kin: float, eps_kin: float,
                            v_bar: float, sigma_ss: float = 0.0) -> np.ndarray:
    """Jacobian of the closed kinematic error loop at its equilibrium.

    State ordering (sigma_k, y_e, theta_bar_e); evaluated on the manifold
    with zero lateral error, slip residual, and gain rate.  The tanh is
    linearized by its slope at the origin.
    """
    u_ss = K_i * sigma_ss / v_bar
    root = math.sqrt(1.0 - u_ss * u_ss)
    theta_ss = -math.asin(u_ss)
    g = psi_kin / eps_kin
    return np.array([
        [0.0, 1.0, 0.0],
        [0.0, 0.0, v_bar * math.cos(theta_ss)],
        [-g * K_i / (v_bar * root), -g * c / (v_bar * root), -g],
    ])


def boundary_layer_w_dot(S_values: np.ndarray, gains: KinGains, c: float,
                         v_bar: float) -> np.ndarray:
    """Lyapunov rate W_dot = S * S_dot along a straight-path state slice.

    The slice holds theta_bar_e = 0 and sigma_k = 0 and parameterizes the
    manifold value through the lateral error alone, so the integral gain
    participates.  Negative everywhere except S = 0 certifies the
    boundary-layer design.
    """
    out = np.empty_like(S_values, dtype=float)
    for idx, S in enumerate(np.asarray(S_values, dtype=float)):
        y_e = v_bar * math.sin(S) / c
        ev = eval_manifold(y_e, 0.0, 0.0, gains, c, 0.0, v_bar, 0.0)
        raw, _, _ = yaw_command(ev, gains, 0.0, v_bar, mode="PROP")
        # S_dot with theta_bar rate = -r_kin (straight path, no slip feed)
        root = math.sqrt(1.0 - ev.u_sat * ev.u_sat)
        u_dot = (gains.K_i * y_e) / v_bar  # y_e_dot = 0 on this slice
        S_dot = -raw + (0.0 if ev.saturated else u_dot / root)
        out[idx] = ev.S_kin * S_dot
    return out
