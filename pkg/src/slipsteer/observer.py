"""High-gain observer for yaw rate and sideslip from a yaw-rate measurement.

Gains scale as alpha1/eps and alpha2/eps^2, so shrinking eps speeds
convergence and shrinks the steady bias left by model error, at the cost
of noise amplification and transient peaking; the peaking is handled
downstream by saturating the kinematic yaw-rate command.

Sideslip reaches the measured yaw rate through the stiffness-moment
coupling a21, so the second innovation gain is applied through 1/a21 (the
observability normal-form scaling).  In the scaled error coordinates
(r_err, a21*beta_err) the design then has exactly the characteristic
polynomial s^2 + alpha1 s + alpha2 over eps.  A vehicle with
C_f L_f = C_r L_r has no such coupling and cannot run this observer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vehicle import DynCoeffs


class ObserverStiffnessError(RuntimeError):
    """Integration step too coarse for the observer's fast dynamics."""


class ObserverDivergedError(RuntimeError):
    """Observer state left the finite range; the run cannot continue."""


@dataclass(frozen=True)
class HgoConfig:
    """Scaled observer gains; h1 = alpha1/eps, h2 = alpha2/eps^2."""

    alpha1: float = 2.0
    alpha2: float = 1.0
    eps: float = 0.05

    def __post_init__(self) -> None:
        if self.alpha1 <= 0.0 or self.alpha2 <= 0.0:
            raise ValueError("alpha gains must be positive (Hurwitz pair)")
        if not 0.0 < self.eps <= 0.2:
            raise ValueError("eps must be in (0, 0.2]")

    @property
    def h1(self) -> float:
        return self.alpha1 / self.eps

    @property
    def h2(self) -> float:
        return self.alpha2 / (self.eps * self.eps)


@dataclass
class HgoState:
    r_hat: float = 0.0
    beta_hat: float = 0.0


def _beta_gain(coeffs: DynCoeffs, cfg: HgoConfig) -> float:
    if abs(coeffs.a21) < 1e-6:
        raise ObserverDivergedError(
            "sideslip unobservable: front/rear stiffness moments cancel (a21 = 0)")
    return cfg.h2 / coeffs.a21


def observer_rates(state: HgoState, y_meas: float, phi_act: float,
                   coeffs: DynCoeffs, cfg: HgoConfig) -> tuple[float, float]:
    """(r_hat_dot, beta_hat_dot): linear model propagation plus innovation."""
    innov = y_meas - state.r_hat
    r_dot = (coeffs.a21 * state.beta_hat + coeffs.a22 * state.r_hat
             + coeffs.b21 * phi_act + cfg.h1 * innov)
    beta_dot = (coeffs.a11 * state.beta_hat + coeffs.a12 * state.r_hat
                + coeffs.b11 * phi_act + _beta_gain(coeffs, cfg) * innov)
    return r_dot, beta_dot


def hgo_step(state: HgoState, y_meas: float, phi_act: float,
             coeffs: DynCoeffs, cfg: HgoConfig, dt: float) -> HgoState:
    """One observer update over dt; requires dt <= eps/5 for stability."""
    if dt > cfg.eps / 5.0 + 1e-12:
        raise ObserverStiffnessError(
            f"observer step {dt} exceeds eps/5 = {cfg.eps / 5.0}")
    h2_eff = _beta_gain(coeffs, cfg)

    # RK4 on the two-state observer with measurement and input held.
    def f(r_h: float, b_h: float) -> tuple[float, float]:
        innov = y_meas - r_h
        return (coeffs.a21 * b_h + coeffs.a22 * r_h + coeffs.b21 * phi_act + cfg.h1 * innov,
                coeffs.a11 * b_h + coeffs.a12 * r_h + coeffs.b11 * phi_act + h2_eff * innov)

    r0, b0 = state.r_hat, state.beta_hat
    k1 = f(r0, b0)
    k2 = f(r0 + 0.5 * dt * k1[0], b0 + 0.5 * dt * k1[1])
    k3 = f(r0 + 0.5 * dt * k2[0], b0 + 0.5 * dt * k2[1])
    k4 = f(r0 + dt * k3[0], b0 + dt * k3[1])
    r_new = r0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    b_new = b0 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    if not (math.isfinite(r_new) and math.isfinite(b_new)) \
            or abs(b_new) > 2.0 or abs(r_new) > 20.0:
        raise ObserverDivergedError(
            f"observer estimates diverged (r_hat={r_new:.3g}, beta_hat={b_new:.3g})")
    return HgoState(r_hat=r_new, beta_hat=b_new)


def substeps_for(dt: float, cfg: HgoConfig, coeffs: DynCoeffs | None = None) -> int:
    """Sub-step count resolving both the eps-fast gains and the model stiffness.

    The innovation dynamics need dt <= eps/5; at low speed the 1/v model
    coefficients themselves can dominate, so a Gershgorin bound of the
    observer matrix sets a second limit.
    """
    n = max(1, math.ceil(5.0 * dt / cfg.eps))
    if coeffs is not None:
        lam = max(abs(coeffs.a22 - cfg.h1) + abs(coeffs.a21),
                  abs(coeffs.a12 - _beta_gain(coeffs, cfg)) + abs(coeffs.a11))
        n = max(n, math.ceil(dt * lam / 2.0))
    return n


def hgo_multi_step(state: HgoState, y_meas: float, phi_act: float,
                   coeffs: DynCoeffs, cfg: HgoConfig, dt: float) -> HgoState:
    """Advance the observer over one plant step, sub-stepping as needed."""
    n = substeps_for(dt, cfg, coeffs)
    h = dt / n
    for _ in range(n):
        state = hgo_step(state, y_meas, phi_act, coeffs, cfg, h)
    return state


def error_system_matrix(cfg: HgoConfig) -> np.ndarray:
    """Dominant estimation-error dynamics (innovation terms only)."""
    return np.array([[-cfg.h1, 1.0], [-cfg.h2, 0.0]])


def error_eigenvalues(cfg: HgoConfig) -> np.ndarray:
    """Eigenvalues of the estimation-error system, sorted by real part."""
    eig = np.linalg.eigvals(error_system_matrix(cfg))
    return eig[np.argsort(eig.real)]


def design_eigenvalues(cfg: HgoConfig) -> np.ndarray:
    """Roots of the scaled characteristic equation s^2 + a1 s + a2, over eps."""
    roots = np.roots([1.0, cfg.alpha1, cfg.alpha2]) / cfg.eps
    return roots[np.argsort(roots.real)]


def peaking_metric(beta_hat: np.ndarray, r_kin_raw: np.ndarray,
                   r_kin_out: np.ndarray, settle_fraction: float = 0.5) -> dict:
    """Transient overshoot diagnostics for an estimate/command history.

    Compares peak magnitudes during the first part of the run against the
    steady band of the remainder, and reports whether the yaw-rate
    saturation ever engaged.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    r_raw = np.asarray(r_kin_raw, dtype=float)
    r_out = np.asarray(r_kin_out, dtype=float)
    if beta_hat.size == 0:
        raise ValueError("empty trace")
    split = max(1, int(settle_fraction * beta_hat.size))
    steady_beta = float(np.abs(beta_hat[split:]).max()) if split < beta_hat.size else 0.0
    return {
        "beta_hat_peak": float(np.abs(beta_hat).max()),
        "beta_hat_steady": steady_beta,
        "beta_hat_overshoot": float(np.abs(beta_hat).max()) - steady_beta,
        "r_kin_raw_peak": float(np.abs(r_raw).max()),
        "r_kin_out_peak": float(np.abs(r_out).max()),
        "saturation_engaged": bool(np.any(r_out != r_raw)),
    }
