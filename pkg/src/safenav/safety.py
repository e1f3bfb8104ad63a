"""Distance-only safety control.

Keeps the robot at a fixed standoff from the dominant feature by shaping the
angular-velocity reference; forward speed is regulated separately. The distance
error is driven to its sliding surface with a super-twisting loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from safenav.dynamics import RobotParams, RobotState, WheelCommand, sat, wheel_command, wrap_angle
from safenav.geometry import DistanceReading, Feature, MovingPoint, Turn
from safenav.reference import V_MIN
from safenav.sta import StaGains, SuperTwisting, surface


@dataclass(frozen=True)
class SafetyGains:
    c_zeta: float = 1.0
    k1: float = 0.8
    k2: float = 0.04
    c_v: float = 5.0
    c_omega: float = 5.0
    # include d(omega_ref)/dt in the angular loop; off in the deployed law
    feedforward: bool = False

    def sta(self, bound: float) -> StaGains:
        return StaGains(self.k1, self.k2, self.c_zeta, bound)


OBSTACLE_GAINS = SafetyGains()
BORDER_GAINS = SafetyGains(c_zeta=10.0, c_v=3.0, c_omega=3.0)

DELTA_FLAG = 0.3  # rad, |delta_tilde| above this is logged as leaving the model-validity band


def zeta_bound(params: RobotParams, safe_distance: float) -> float:
    """Admissible magnitude of the distance-loop input, ``(bU/a)^2 (2/d - 1/d_safe)``."""
    vmax = params.b * params.U / params.a
    return vmax * vmax * (2.0 / params.d - 1.0 / safe_distance)


def omega_ref(
    v: float,
    safe_distance: float,
    u_zeta: float,
    turn: Turn,
    params: RobotParams,
    v_min: float = V_MIN,
) -> float:
    """Angular-velocity reference ``v/d_safe - U_z sat(u_z/U_z)/v`` (mirrored for clockwise)."""
    bound = zeta_bound(params, safe_distance)
    v = max(v, v_min)
    return turn.sign * (v / safe_distance - bound * sat(u_zeta / bound) / v)


def zeta2_analytic(state: RobotState, reading: DistanceReading) -> float:
    """Distance rate ``v cos(delta)`` for a feature whose closest point is at rest."""
    return state.v * math.cos(reading.delta)


@dataclass
class Zeta2Estimator:
    """Distance-rate estimate; low-pass filtered finite difference for moving features."""

    time_constant_steps: float = 10.0
    value: float | None = None
    _last: DistanceReading | None = None

    def reset(self) -> None:
        self.value = None
        self._last = None

    def update(self, state: RobotState, reading: DistanceReading, moving: bool, dt: float) -> float:
        analytic = zeta2_analytic(state, reading)
        prev = self._last
        self._last = reading
        if not moving or prev is None or prev.feature != reading.feature:
            self.value = analytic
            return analytic
        raw = (reading.clearance - prev.clearance) / dt
        alpha = 1.0 / (1.0 + self.time_constant_steps)
        self.value = self.value + alpha * (raw - self.value)
        return self.value


def zeta2_estimate(
    state: RobotState,
    reading: DistanceReading,
    prev_reading: DistanceReading | None,
    dt: float,
    moving: bool = False,
) -> float:
    """Stateless single-sample version of :class:`Zeta2Estimator` (no filtering)."""
    if not moving or prev_reading is None or prev_reading.feature != reading.feature:
        return zeta2_analytic(state, reading)
    return (reading.clearance - prev_reading.clearance) / dt


@dataclass
class SafetyOutput:
    command: WheelCommand
    zeta1: float
    zeta2: float
    s_zeta: float
    u_zeta: float
    omega_ref: float
    delta_tilde: float


@dataclass
class SafetyController:
    params: RobotParams
    gains: SafetyGains = field(default_factory=SafetyGains)
    v_min: float = V_MIN

    def __post_init__(self):
        self.sta = SuperTwisting(self.gains.sta(1.0))
        self.estimator = Zeta2Estimator()
        self._feature: str | None = None
        self._last_omega_ref: float | None = None

    def activate(self, feature: Feature) -> None:
        """Start a new encounter: fresh integral, fresh rate filter."""
        bound = zeta_bound(self.params, feature.safe_distance)
        self.sta = SuperTwisting(self.gains.sta(bound))
        self.estimator.reset()
        self._feature = feature.name
        self._last_omega_ref = None

    def update(
        self,
        state: RobotState,
        reading: DistanceReading,
        feature: Feature,
        v_target: float,
        dt: float,
    ) -> SafetyOutput:
        if self._feature != feature.name:
            self.activate(feature)
        p, g = self.params, self.gains
        turn = feature.geometric_turn
        zeta1 = reading.clearance - feature.safe_distance
        zeta2 = self.estimator.update(state, reading, isinstance(feature.shape, MovingPoint), dt)
        s = surface(zeta1, zeta2, g.c_zeta)
        u_zeta = self.sta.update(s, -g.c_zeta * zeta2, dt)
        w_ref = omega_ref(state.v, feature.safe_distance, u_zeta, turn, p, self.v_min)

        ff = 0.0
        if g.feedforward and self._last_omega_ref is not None:
            ff = (w_ref - self._last_omega_ref) / dt
        self._last_omega_ref = w_ref

        u_omega = (-g.c_omega * (state.omega - w_ref) + p.a * state.omega + ff) / p.b
        u_v = (-g.c_v * (state.v - v_target) + p.a * state.v) / p.b
        delta_tilde = wrap_angle(reading.delta - turn.sign * math.pi / 2.0)
        return SafetyOutput(wheel_command(u_v, u_omega, p), zeta1, zeta2, s, u_zeta, w_ref, delta_tilde)


def safety_command(
    state: RobotState,
    reading: DistanceReading,
    feature: Feature,
    v_target: float,
    controller: SafetyController,
    dt: float,
) -> WheelCommand:
    return controller.update(state, reading, feature, v_target, dt).command
