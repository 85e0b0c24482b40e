"""Path-frame tracking errors with a moving, longitudinally-anchored frame.

The desired posture slides along the path so its longitudinal offset to
the vehicle stays at zero; only lateral error y_e and heading error
theta_e remain.  y_e > 0 means the vehicle is on the clockwise side of
the tangent (right of the path); theta_e = theta_ref - theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .paths import Path, RefSample
from .vehicle import wrap_angle


class ProjectionLostError(RuntimeError):
    """Vehicle left the projection window; the run cannot continue."""


@dataclass(frozen=True)
class ErrorState:
    """Tracking errors and reference bookkeeping for one step."""

    y_e: float          # lateral error, m (right of path positive)
    theta_e: float      # heading error, rad, wrapped
    sigma_k: float      # time integral of y_e
    s_ref: float        # arc length of the anchored reference frame
    v_ref: float        # reference speed keeping the frame alongside
    kappa_ref: float    # path curvature at s_ref
    dkappa_ds: float    # curvature slope at s_ref
    x_resid: float      # residual longitudinal offset after projection, m
    seg_index: int
    at_path_end: bool


def _frame_errors(sample: RefSample, x: float, y: float) -> tuple[float, float]:
    """(longitudinal, lateral) offset of the vehicle in the frame at ``sample``.

    Lateral axis points 90 deg clockwise from the tangent, so a vehicle to
    the right of the path has positive lateral offset.
    """
    dx = x - sample.x
    dy = y - sample.y
    lon = math.cos(sample.theta) * dx + math.sin(sample.theta) * dy
    lat = math.sin(sample.theta) * dx - math.cos(sample.theta) * dy
    return lon, lat


def project(path: Path, x: float, y: float, s_prev: float,
            window: float) -> tuple[RefSample, float, float, bool]:
    """Advance the frame so the longitudinal offset vanishes.

    Newton iteration on s (the offset is monotone in s for bounded
    curvature), constrained to [s_prev - window, s_prev + window] and to
    the path itself.  Returns (sample, lateral error, residual, at_end).
    """
    lo = max(0.0, s_prev - window)
    hi = min(path.total_length, s_prev + window)
    s = min(max(s_prev, lo), hi)
    sample = path.sample(s)
    lon, lat = _frame_errors(sample, x, y)
    for _ in range(12):
        if abs(lon) < 1e-9:
            break
        slope = -1.0 + sample.kappa * lat
        if abs(slope) < 1e-6:
            slope = -1.0
        s_new = min(max(s - lon / slope, lo), hi)
        if s_new == s:
            break
        s = s_new
        sample = path.sample(s)
        lon, lat = _frame_errors(sample, x, y)
    at_end = s >= path.total_length - 1e-9
    if abs(lon) > 1e-3 and not at_end and s > lo + 1e-9:
        raise ProjectionLostError(
            f"projection failed to anchor near s={s:.2f} (residual {lon:.4f} m)")
    if abs(lat) > 10.0:
        raise ProjectionLostError(
            f"vehicle diverged laterally ({lat:.2f} m) at s={s:.2f}")
    return sample, lat, lon, at_end


def initial_error_state(path: Path, x: float, y: float, theta: float,
                        v: float, alpha_r: float, s_guess: float = 0.0) -> ErrorState:
    sample, lat, lon, at_end = project(path, x, y, s_guess, window=5.0)
    return _assemble(sample, lat, lon, at_end, theta, v, alpha_r, sigma_k=0.0)


def _assemble(sample: RefSample, lat: float, lon: float, at_end: bool,
              theta: float, v: float, alpha_r: float, sigma_k: float) -> ErrorState:
    theta_e = wrap_angle(sample.theta - theta)
    # One substitution pass of the zero-longitudinal-rate condition:
    # v_ref (1 + y_e kappa) = v cos(theta_e - alpha_r).
    denom = 1.0 + lat * sample.kappa
    if abs(denom) < 1e-3:
        denom = math.copysign(1e-3, denom)
    v_ref = v * math.cos(theta_e - alpha_r) / denom
    return ErrorState(y_e=lat, theta_e=theta_e, sigma_k=sigma_k, s_ref=sample.s,
                      v_ref=v_ref, kappa_ref=sample.kappa, dkappa_ds=sample.dkappa_ds,
                      x_resid=lon, seg_index=sample.seg_index, at_path_end=at_end)


def update_reference(path: Path, pose: tuple[float, float, float], v: float,
                     prev: ErrorState, dt: float, alpha_r: float) -> ErrorState:
    """Advance the reference frame by one step and recompute errors.

    alpha_r is the rear tire slip angle used in the reference-speed
    resolution: the truth value under state feedback, an estimate under
    output feedback.  sigma_k advances by the trapezoid rule.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x, y, theta = pose
    window = abs(v) * dt + 2.0
    sample, lat, lon, at_end = project(path, x, y, prev.s_ref, window)
    sigma_k = prev.sigma_k + 0.5 * dt * (prev.y_e + lat)
    return _assemble(sample, lat, lon, at_end, theta, v, alpha_r, sigma_k)


def reset_integral(state: ErrorState) -> ErrorState:
    return replace(state, sigma_k=0.0)


def compensated_heading(theta_e: float, beta_hat: float, K_F: float = 1.0) -> float:
    """Slip-compensated heading error: theta_e plus the sideslip estimate."""
    return theta_e + K_F * beta_hat
