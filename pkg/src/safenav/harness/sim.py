"""Closed-loop simulation of one or more robots in a shared environment."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from safenav.dynamics import RobotState, WheelCommand, step
from safenav.errors import DegenerateDistanceError
from safenav.geometry import (
    ClosestPointTracker,
    DistanceReading,
    Feature,
    Mode,
    MovingPoint,
    Polygon,
    body_error,
    clearance,
    closest,
)
from safenav.harness.scenario import RobotSetup, Scenario
from safenav.reference import ReferencePoint, advance, initial_reference, shadow_speed
from safenav.safety import DELTA_FLAG, SafetyController
from safenav.supervisor import Phase, Supervisor, Transition
from safenav.tracking import TrackingController

log = logging.getLogger(__name__)

COLUMNS = (
    "t",
    "robot",
    "x",
    "y",
    "theta",
    "v",
    "omega",
    "x_r",
    "y_r",
    "u_R",
    "u_L",
    "mode",
    "feature",
    "d_o",
    "e_y",
    "s_eta",
    "s_xi",
    "s_zeta",
    "delta_tilde",
)

NAN = math.nan


@dataclass
class Violation:
    t: float
    robot: str
    feature: str
    kind: str
    clearance: float


@dataclass
class Trace:
    scenario: str
    dt: float
    seed: int
    rows: list[tuple] = field(default_factory=list)
    status: str = "OK"
    violation: Violation | None = None
    transitions: dict[str, list[Transition]] = field(default_factory=dict)
    features: dict[str, tuple[float, float]] = field(default_factory=dict)
    final_states: dict[str, RobotState] = field(default_factory=dict)
    delta_excursions: dict[str, int] = field(default_factory=dict)
    corner_jumps: list[tuple[float, str, float]] = field(default_factory=list)

    columns = COLUMNS

    @property
    def failed(self) -> bool:
        return self.status != "OK"

    def column(self, name: str, robot: str | None = None) -> list:
        i = COLUMNS.index(name)
        return [row[i] for row in self.rows if robot is None or row[1] == robot]

    @property
    def robots(self) -> list[str]:
        return list(self.final_states)


@dataclass
class _Agent:
    setup: RobotSetup
    state: RobotState
    ref: ReferencePoint
    tracking: TrackingController
    safety: SafetyController
    supervisor: Supervisor
    features: list[Feature]
    excursions: int = 0
    pending: tuple | None = None


def _inter_robot_features(scenario: Scenario, me: RobotSetup) -> list[Feature]:
    if scenario.inter_robot is None:
        return []
    sd, band = scenario.inter_robot
    return [
        Feature(other.name, MovingPoint(other.name), sd, band, Mode.AVOID_OUTSIDE, me.inter_robot_turn)
        for other in scenario.robots
        if other.name != me.name
    ]


def _init_agent(scenario: Scenario, setup: RobotSetup) -> _Agent:
    L = setup.params.look_ahead
    x, y, th = setup.reference_start
    ref = initial_reference(x, y, th, setup.profile, L)
    tracking = TrackingController(setup.params, setup.tracking)
    tracking.check_initial_heading(setup.initial, ref)
    return _Agent(
        setup=setup,
        state=setup.initial,
        ref=ref,
        tracking=tracking,
        safety=SafetyController(setup.params, setup.safety),
        supervisor=Supervisor(dwell=scenario.dwell, rule=scenario.geofence_rule),
        features=list(scenario.features) + _inter_robot_features(scenario, setup),
    )


def _dominant(agent: _Agent, readings: dict[str, DistanceReading]) -> tuple[Feature, DistanceReading] | None:
    if not readings:
        return None
    active = agent.supervisor.feature
    if active is not None and active in readings:
        name = active
    else:
        name = min(readings, key=lambda n: readings[n].clearance)
    feature = next(f for f in agent.features if f.name == name)
    return feature, readings[name]


def run(scenario: Scenario, dt: float | None = None, duration: float | None = None) -> Trace:
    """Simulate ``scenario`` and return the full trace.

    Every step reads one snapshot of all robot positions, computes every robot's
    command from it, then integrates all robots; robot order is irrelevant.
    """
    dt = scenario.dt if dt is None else dt
    duration = scenario.duration if duration is None else duration
    n_steps = int(round(duration / dt))
    agents = [_init_agent(scenario, r) for r in scenario.robots]
    trace = Trace(scenario.name, dt, scenario.seed)
    trace.features = {f.name: (f.safe_distance, f.band) for a in agents for f in a.features}
    tracker = ClosestPointTracker(threshold=0.05)

    for k in range(n_steps):
        t = k * dt
        snapshot = {a.setup.name: a.state.position for a in agents}
        commands: list[WheelCommand] = []
        for agent in agents:
            cmd = _control(agent, t, dt, snapshot, trace, tracker)
            if cmd is None:
                trace.status = "FAILED"
                break
            commands.append(cmd)
        if trace.failed:
            break
        for agent, cmd in zip(agents, commands):
            s = agent.setup
            agent.state = step(agent.state, cmd, s.disturbance, s.params, dt, t)
            agent.ref = advance(agent.ref, s.profile, t, dt, s.params.look_ahead)
            if not all(math.isfinite(c) for c in agent.state.as_array()):
                trace.status = "FAILED"
                trace.violation = Violation(t + dt, s.name, "", "non-finite state", NAN)
        if trace.failed:
            break

    for agent in agents:
        name = agent.setup.name
        trace.final_states[name] = agent.state
        trace.transitions[name] = list(agent.supervisor.log)
        trace.delta_excursions[name] = agent.excursions
    trace.corner_jumps = tracker.jumps
    return trace


def _control(agent: _Agent, t, dt, snapshot, trace: Trace, tracker) -> WheelCommand | None:
    s, state, ref = agent.setup, agent.state, agent.ref
    readings: dict[str, DistanceReading] = {}
    for f in agent.features:
        try:
            reading = closest(state.position, f, state.theta, snapshot)
        except DegenerateDistanceError:
            trace.violation = Violation(t, s.name, f.name, "degenerate distance", 0.0)
            return None
        if reading.clearance <= 0.0:
            trace.violation = Violation(t, s.name, f.name, "collision", reading.clearance)
            return None
        readings[f.name] = reading
        if isinstance(f.shape, Polygon):
            tracker.observe(t, reading)

    _, e_y = body_error(state, ref)
    dom = _dominant(agent, readings)
    sup = agent.supervisor
    if dom is not None:
        feature, reading = dom
        ref_in_zone = clearance(ref.position, feature, snapshot) <= feature.safe_distance + feature.band
        before = sup.phase
        sup.decide(t, feature, reading, ref_in_zone, e_y)
        if before is Phase.A0 and sup.phase.safety:
            agent.safety.activate(feature)

    s_eta = s_xi = s_zeta = d_tilde = NAN
    if sup.phase.safety:
        v_target = shadow_speed(state.theta, ref.theta, ref.v) if s.shadow_speed else ref.v
        out = agent.safety.update(state, reading, feature, v_target, dt)
        cmd, s_zeta, d_tilde = out.command, out.s_zeta, out.delta_tilde
        if abs(d_tilde) > DELTA_FLAG:
            agent.excursions += 1
    else:
        out = agent.tracking.update(state, ref, dt)
        cmd, s_eta, s_xi = out.command, out.s_eta, out.s_xi

    feature_name = dom[0].name if dom else ""
    d_o = dom[1].clearance if dom else NAN
    trace.rows.append(
        (
            t,
            s.name,
            state.x,
            state.y,
            state.theta,
            state.v,
            state.omega,
            ref.x,
            ref.y,
            cmd.u_R,
            cmd.u_L,
            sup.phase.value,
            feature_name,
            d_o,
            e_y,
            s_eta,
            s_xi,
            s_zeta,
            d_tilde,
        )
    )
    return cmd
