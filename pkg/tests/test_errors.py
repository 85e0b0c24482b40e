import math

import numpy as np
import pytest

from slipsteer.errors import (ProjectionLostError, compensated_heading,
                              initial_error_state, project, update_reference)
from slipsteer.paths import arc, build_path, line


def straight():
    return build_path([line(200.0)])


def test_on_path_aligned_zero_errors():
    p = straight()
    st = initial_error_state(p, 25.0, 0.0, 0.0, v=8.0, alpha_r=0.0, s_guess=20.0)
    assert st.y_e == pytest.approx(0.0, abs=1e-9)
    assert st.theta_e == 0.0
    assert st.v_ref == pytest.approx(8.0)
    assert abs(st.x_resid) < 1e-6


def test_lateral_offset_sign():
    # vehicle displaced to the clockwise side of the tangent reads positive
    p = straight()
    st = initial_error_state(p, 25.0, -0.5, 0.0, v=8.0, alpha_r=0.0, s_guess=25.0)
    assert st.y_e == pytest.approx(0.5, abs=1e-9)
    assert st.theta_e == 0.0
    st = initial_error_state(p, 25.0, +0.5, 0.0, v=8.0, alpha_r=0.0, s_guess=25.0)
    assert st.y_e == pytest.approx(-0.5, abs=1e-9)


def test_arc_reference_speed_and_yaw():
    p = build_path([arc(50.0, angle_deg=180.0)])
    smp = p.sample(30.0)
    st = initial_error_state(p, smp.x, smp.y, smp.theta, v=10.0, alpha_r=0.0,
                             s_guess=30.0)
    assert st.v_ref == pytest.approx(10.0, abs=1e-9)
    assert st.kappa_ref * st.v_ref == pytest.approx(0.2)


def test_update_advances_frame_and_integral():
    p = straight()
    st = initial_error_state(p, 0.0, -0.2, 0.0, v=5.0, alpha_r=0.0)
    dt = 0.1
    st2 = update_reference(p, (0.5, -0.2, 0.0), 5.0, st, dt, alpha_r=0.0)
    assert st2.s_ref == pytest.approx(0.5, abs=1e-6)
    assert st2.sigma_k == pytest.approx(0.2 * dt, rel=1e-9)  # trapezoid of constant
    assert abs(st2.x_resid) < 1e-6


def test_update_requires_positive_dt():
    p = straight()
    st = initial_error_state(p, 0.0, 0.0, 0.0, v=5.0, alpha_r=0.0)
    with pytest.raises(ValueError):
        update_reference(p, (0.1, 0.0, 0.0), 5.0, st, 0.0, 0.0)


def test_projection_lost_on_divergence():
    p = straight()
    with pytest.raises(ProjectionLostError):
        initial_error_state(p, 20.0, 15.0, 0.0, v=5.0, alpha_r=0.0, s_guess=20.0)


def test_path_end_flag():
    p = straight()
    st = initial_error_state(p, 199.5, 0.0, 0.0, v=5.0, alpha_r=0.0, s_guess=199.0)
    st2 = update_reference(p, (201.0, 0.0, 0.0), 5.0, st, 0.2, 0.0)
    assert st2.at_path_end


def test_compensated_heading():
    assert compensated_heading(0.05, 0.0) == 0.05
    assert compensated_heading(0.05, -0.01, K_F=1.0) == pytest.approx(0.04)
    assert compensated_heading(0.05, -0.01, K_F=0.0) == 0.05  # ablation mode


def test_vref_consistency_on_arc_with_offset():
    # one fixed-point pass keeps the longitudinal rate at zero to first order:
    # v_ref (1 + y_e kappa) = v cos(theta_e - alpha_r)
    p = build_path([arc(50.0, angle_deg=180.0)])
    smp = p.sample(40.0)
    x = smp.x + 0.5 * math.sin(smp.theta)
    y = smp.y - 0.5 * math.cos(smp.theta)
    st = initial_error_state(p, x, y, smp.theta - 0.03, v=9.0, alpha_r=0.002,
                             s_guess=40.0)
    assert st.y_e == pytest.approx(0.5, abs=1e-6)
    lhs = st.v_ref * (1.0 + st.y_e * st.kappa_ref)
    rhs = 9.0 * math.cos(st.theta_e - 0.002)
    assert lhs == pytest.approx(rhs, rel=1e-9)
