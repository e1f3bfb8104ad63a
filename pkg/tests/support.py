"""Closed-loop helpers shared by the test modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from safenav.dynamics import NO_DISTURBANCE, RobotParams, RobotState, step
from safenav.geometry import Disc, Feature, closest
from safenav.linearization import TransformedState, inverse
from safenav.reference import ConstantRates, advance, initial_reference
from safenav.safety import OBSTACLE_GAINS, SafetyController
from safenav.tracking import TrackingController

PARAMS = RobotParams()
L = PARAMS.look_ahead


@dataclass
class TrackingRun:
    t: np.ndarray
    position_error: np.ndarray
    heading_error: np.ndarray
    s_eta: np.ndarray
    s_xi: np.ndarray
    states: list


def run_tracking(
    ref_pose: tuple[float, float, float],
    profile,
    initial: RobotState,
    duration: float,
    dt: float = 1e-3,
    disturbance=NO_DISTURBANCE,
    params: RobotParams = PARAMS,
) -> TrackingRun:
    ref = initial_reference(*ref_pose, profile, params.look_ahead)
    ctrl = TrackingController(params)
    state = initial
    n = int(round(duration / dt))
    t = np.arange(n + 1) * dt
    err, th, s1, s2, states = [], [], [], [], []
    for k in range(n + 1):
        err.append(math.dist(state.position, ref.position))
        th.append(math.remainder(state.theta - ref.theta, 2 * math.pi))
        states.append(state)
        if k == n:
            break
        out = ctrl.update(state, ref, dt)
        s1.append(out.s_eta)
        s2.append(out.s_xi)
        state = step(state, out.command, disturbance, params, dt, k * dt)
        ref = advance(ref, profile, k * dt, dt, params.look_ahead)
    s1.append(s1[-1])
    s2.append(s2[-1])
    return TrackingRun(t, np.array(err), np.array(th), np.array(s1), np.array(s2), states)


def state_with_heading(ref_pose, profile, heading_error: float, params: RobotParams = PARAMS) -> RobotState:
    """Robot whose look-ahead point and its velocity coincide with the reference's,
    but whose heading differs by ``heading_error``."""
    ref = initial_reference(*ref_pose, profile, params.look_ahead)
    ts = TransformedState(ref.eta1, ref.xi1, ref.eta2, ref.xi2, ref.theta + heading_error)
    return inverse(ts, params.look_ahead)


@dataclass
class CirclingRun:
    t: np.ndarray
    d_o: np.ndarray
    delta_tilde: np.ndarray
    zeta2: np.ndarray
    s_zeta: np.ndarray
    states: list


def run_circling(
    v_target: float,
    duration: float = 10.0,
    dt: float = 1e-3,
    safe: float = 0.5,
    band: float = 0.05,
    turn=None,
    gains=OBSTACLE_GAINS,
    params: RobotParams = PARAMS,
) -> CirclingRun:
    """Safety control around a point obstacle at the origin, starting on the
    outer band edge with the obstacle exactly abeam."""
    from safenav.geometry import Turn

    turn = turn or Turn.COUNTERCLOCKWISE
    feature = Feature("p", Disc((0.0, 0.0)), safe, band, turn=turn)
    r0 = safe + band
    # counterclockwise keeps the obstacle on the left: heading +pi/2 at (r0, 0)
    heading = turn.sign * math.pi / 2
    state = RobotState(r0, 0.0, heading, min(v_target, params.b * params.U / params.a), 0.0)
    ctrl = SafetyController(params, gains)
    ctrl.activate(feature)
    n = int(round(duration / dt))
    out = dict(d=[], dt_=[], z2=[], s=[])
    states = []
    for k in range(n + 1):
        reading = closest(state.position, feature, state.theta)
        o = ctrl.update(state, reading, feature, v_target, dt)
        out["d"].append(reading.d_o)
        out["dt_"].append(o.delta_tilde)
        out["z2"].append(o.zeta2)
        out["s"].append(o.s_zeta)
        states.append(state)
        if k < n:
            state = step(state, o.command, NO_DISTURBANCE, params, dt, k * dt)
    return CirclingRun(
        np.arange(n + 1) * dt,
        np.array(out["d"]),
        np.array(out["dt_"]),
        np.array(out["z2"]),
        np.array(out["s"]),
        states,
    )


def circle(v: float, omega: float) -> ConstantRates:
    return ConstantRates(v, omega)


def run_double_integrator(disturbance, gains, z0=(1.0, 0.0), duration=10.0, dt=1e-3):
    """``z1' = z2, z2' = w + disturbance(t)`` under the super-twisting law.

    Returns the time grid and the surface history. The plant update is exact
    for a control held over the step, with the disturbance sampled at midstep.
    """
    from safenav.sta import SuperTwisting, equivalent_control, surface

    ctrl = SuperTwisting(gains)
    z1, z2 = z0
    n = int(round(duration / dt))
    sig = np.empty(n + 1)
    for k in range(n + 1):
        s = surface(z1, z2, gains.slope)
        sig[k] = s
        if k == n:
            break
        w = ctrl.update(s, equivalent_control(0.0, z2, gains.slope), dt)
        acc = w + disturbance(k * dt + dt / 2)
        z1 += z2 * dt + 0.5 * acc * dt * dt
        z2 += acc * dt
    return np.arange(n + 1) * dt, sig


def settle_time(t, values, tol):
    """First time after which ``|values| <= tol`` holds to the end, or inf."""
    bad = np.nonzero(np.abs(values) > tol)[0]
    if bad.size == 0:
        return float(t[0])
    if bad[-1] == len(values) - 1:
        return math.inf
    return float(t[bad[-1] + 1])
