import math

import numpy as np
import pytest
from support import PARAMS, run_circling, settle_time

from safenav.dynamics import RobotState
from safenav.geometry import Disc, Feature, MovingPoint, Turn, closest
from safenav.safety import (
    BORDER_GAINS,
    OBSTACLE_GAINS,
    SafetyController,
    SafetyGains,
    Zeta2Estimator,
    omega_ref,
    zeta2_estimate,
    zeta_bound,
)

CCW = Turn.COUNTERCLOCKWISE


def test_pure_curvature_term():
    assert omega_ref(0.7, 0.5, 0.0, CCW, PARAMS) == pytest.approx(1.4)


def test_zeta_bound_default_params():
    assert zeta_bound(PARAMS, 0.5) == pytest.approx(0.49 * (2 / 0.235 - 2), rel=1e-12)
    assert f"{zeta_bound(PARAMS, 0.5):.5g}" == "3.1902"


def test_over_demand_saturates_at_bound():
    bound = zeta_bound(PARAMS, 0.5)
    v = 0.6
    w = omega_ref(v, 0.5, 2 * bound, CCW, PARAMS)
    assert v / 0.5 - w == pytest.approx(bound / v)


def test_clockwise_is_sign_mirrored():
    for u in (-1.0, 0.0, 0.8):
        assert omega_ref(0.6, 0.5, u, Turn.CLOCKWISE, PARAMS) == pytest.approx(-omega_ref(0.6, 0.5, u, CCW, PARAMS))


def test_speed_divisor_is_floored():
    assert omega_ref(0.0, 0.5, 0.1, CCW, PARAMS) == omega_ref(0.05, 0.5, 0.1, CCW, PARAMS)


def test_preset_gains():
    assert (OBSTACLE_GAINS.k1, OBSTACLE_GAINS.k2, OBSTACLE_GAINS.c_zeta, OBSTACLE_GAINS.c_v, OBSTACLE_GAINS.c_omega) == (
        0.8, 0.04, 1.0, 5.0, 5.0)
    assert (BORDER_GAINS.k1, BORDER_GAINS.k2, BORDER_GAINS.c_zeta, BORDER_GAINS.c_v, BORDER_GAINS.c_omega) == (
        0.8, 0.04, 10.0, 3.0, 3.0)


def _on_circle(v, turn=CCW):
    feature = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05, turn=turn)
    w = omega_ref(v, 0.5, 0.0, turn, PARAMS)
    state = RobotState(0.5, 0.0, turn.sign * math.pi / 2, v, w)
    return feature, state


def test_on_safe_circle_only_decay_is_compensated():
    # 0.4 m/s keeps both wheels below the voltage bound
    feature, state = _on_circle(0.4)
    ctrl = SafetyController(PARAMS)
    ctrl.activate(feature)
    out = ctrl.update(state, closest(state.position, feature, state.theta), feature, 0.4, 1e-3)
    assert out.zeta1 == pytest.approx(0.0, abs=1e-15)
    assert out.zeta2 == pytest.approx(0.0, abs=1e-15)
    # cos(pi/2) leaves ~1e-17 in the surface; the square root lifts it to ~1e-9
    assert out.u_zeta == pytest.approx(0.0, abs=1e-8)
    u_v = (out.command.u_R + out.command.u_L) / 2
    u_w = (out.command.u_R - out.command.u_L) / PARAMS.d
    assert u_v == pytest.approx(PARAMS.a * state.v / PARAMS.b)
    assert u_w == pytest.approx(PARAMS.a * state.omega / PARAMS.b)


def test_too_far_tightens_the_turn():
    feature = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05)
    state = RobotState(0.6, 0.0, math.pi / 2, 0.6, 0.0)
    ctrl = SafetyController(PARAMS)
    ctrl.activate(feature)
    out = ctrl.update(state, closest(state.position, feature, state.theta), feature, 0.6, 1e-3)
    assert out.zeta1 == pytest.approx(0.1)
    assert out.u_zeta < 0.0
    assert out.omega_ref > 0.6 / 0.5


def test_circling_at_feasible_speed_holds_distance():
    run = run_circling(0.5, 10.0)
    assert np.abs(run.d_o[run.t > 2.0] - 0.5).max() <= 0.05


def test_circling_at_half_pi_speed_holds_distance():
    # v_target = 0.5 pi is above the 0.7 m/s speed bound
    run = run_circling(0.5 * math.pi, 10.0)
    assert np.abs(run.d_o[run.t > 2.0] - 0.5).max() <= 0.05


def test_surface_settles_while_circling():
    run = run_circling(0.5, 10.0)
    assert settle_time(run.t, run.s_zeta, 1e-2) <= run.t[-1] - 1.0


def test_alignment_error_averages_to_zero():
    run = run_circling(0.5, 10.0)
    assert abs(run.delta_tilde[run.t > 1.0].mean()) <= 0.1


def test_clockwise_circling_mirrors_counterclockwise():
    a = run_circling(0.5, 5.0)
    b = run_circling(0.5, 5.0, turn=Turn.CLOCKWISE)
    for p, q in zip(a.states, b.states):
        assert (q.x, q.y, q.theta, q.v, q.omega) == pytest.approx((p.x, -p.y, -p.theta, p.v, -p.omega), abs=1e-6)


def test_zeta2_tangential_motion_is_zero():
    f = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05)
    s = RobotState(1.0, 0.0, math.pi / 2, 0.6, 0.0)
    assert zeta2_estimate(s, closest(s.position, f, s.theta), None, 1e-3) == pytest.approx(0.0, abs=1e-15)


def test_zeta2_sixty_degrees():
    f = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05)
    s = RobotState(1.0, 0.0, math.pi / 3, 0.6, 0.0)
    assert zeta2_estimate(s, closest(s.position, f, s.theta), None, 1e-3) == pytest.approx(0.3)


def test_zeta2_head_on():
    f = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05)
    s = RobotState(1.0, 0.0, 0.0, 0.6, 0.0)
    assert zeta2_estimate(s, closest(s.position, f, s.theta), None, 1e-3) == pytest.approx(0.6)


def test_zeta2_moving_feature_uses_filtered_difference():
    f = Feature("other", MovingPoint("other"), 0.5, 0.05)
    est = Zeta2Estimator()
    s = RobotState(1.0, 0.0, math.pi / 2, 0.0, 0.0)
    dt = 1e-3
    # the other robot recedes at 0.4 m/s along -x; our robot is still
    vals = []
    for k in range(200):
        r = closest(s.position, f, s.theta, {"other": (-0.4 * k * dt, 0.0)})
        vals.append(est.update(s, r, True, dt))
    assert vals[0] == 0.0
    assert vals[-1] == pytest.approx(0.4, abs=1e-6)


def test_zeta2_feature_switch_resets_filter():
    est = Zeta2Estimator()
    s = RobotState(1.0, 0.0, 0.0, 0.6, 0.0)
    a = Feature("a", MovingPoint("a"), 0.5, 0.05)
    b = Feature("b", MovingPoint("b"), 0.5, 0.05)
    est.update(s, closest(s.position, a, 0.0, {"a": (0.0, 0.0)}), True, 1e-3)
    v = est.update(s, closest(s.position, b, 0.0, {"b": (3.0, 0.0)}), True, 1e-3)
    assert v == pytest.approx(-0.6)


def test_activation_resets_integral():
    feature = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05)
    ctrl = SafetyController(PARAMS)
    ctrl.activate(feature)
    s = RobotState(0.6, 0.0, math.pi / 2, 0.6, 0.0)
    for _ in range(10):
        ctrl.update(s, closest(s.position, feature, s.theta), feature, 0.6, 1e-3)
    assert ctrl.sta.integral != 0.0
    ctrl.activate(feature)
    assert ctrl.sta.integral == 0.0


def test_feedforward_switch_changes_command():
    feature = Feature("p", Disc((0.0, 0.0)), 0.5, 0.05)
    a = SafetyController(PARAMS, SafetyGains())
    b = SafetyController(PARAMS, SafetyGains(feedforward=True))
    outs = []
    for c in (a, b):
        c.activate(feature)
        s = RobotState(0.6, 0.0, math.pi / 2, 0.6, 0.0)
        c.update(s, closest(s.position, feature, s.theta), feature, 0.6, 1e-3)
        s2 = RobotState(0.6, 0.001, math.pi / 2 + 0.01, 0.6, 0.1)
        outs.append(c.update(s2, closest(s2.position, feature, s2.theta), feature, 0.6, 1e-3).command)
    assert outs[0] != outs[1]
