"""Differential-drive robot with first-order wheel motors.

The plant state is ``(x, y, theta, v, omega)``. Wheel voltages are the inputs and
each wheel may carry a bounded, Lipschitz disturbance acceleration.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from safenav.errors import ConfigurationError


def wrap_angle(angle: float) -> float:
    """Wrap ``angle`` into the half-open interval (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def angle_diff(a: float, b: float) -> float:
    return wrap_angle(a - b)


def sign(x: float) -> float:
    # sign(0) = 0 on purpose: no bias injected on the sliding surface
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def sat(psi: float) -> float:
    """Unit saturation: ``psi`` inside (-1, 1), ``sign(psi)`` outside."""
    if psi >= 1.0:
        return 1.0
    if psi <= -1.0:
        return -1.0
    return psi


def clamp(x: float, bound: float) -> float:
    return bound * sat(x / bound) if bound > 0.0 else 0.0


@dataclass(frozen=True)
class RobotParams:
    """Motor pole ``a`` [1/s], motor gain ``b`` [(m/s^2)/V], wheel separation
    ``d`` [m] and wheel voltage bound ``U`` [V]."""

    a: float = 3.85
    b: float = 3.85
    d: float = 0.235
    U: float = 0.7

    def check(self) -> list[str]:
        """Return the admissibility problems of this parameter set (empty if ok)."""
        problems = []
        for name in ("a", "b", "d"):
            if not getattr(self, name) > 0.0:
                problems.append(f"{name} must be positive (got {getattr(self, name)})")
        if problems:
            return problems
        limit = self.a**2 * self.d / self.b
        if not 0.0 < self.U < limit:
            problems.append(f"U must satisfy 0 < U < a^2 d / b = {limit:.6g} (got {self.U})")
        return problems

    def validate(self) -> "RobotParams":
        problems = self.check()
        if problems:
            raise ConfigurationError("inadmissible robot parameters", problems)
        return self

    @property
    def look_ahead(self) -> float:
        return self.d / 2.0

    @property
    def omega_voltage_bound(self) -> float:
        """Bound on the angular input channel, 2U/d."""
        return 2.0 * self.U / self.d


@dataclass(frozen=True)
class RobotState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v: float = 0.0
    omega: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.v, self.omega])

    @classmethod
    def from_array(cls, arr) -> "RobotState":
        x, y, theta, v, omega = (float(c) for c in arr)
        return cls(x, y, wrap_angle(theta), v, omega)


@dataclass(frozen=True)
class WheelCommand:
    u_R: float = 0.0
    u_L: float = 0.0

    def saturated(self, params: RobotParams) -> "WheelCommand":
        return WheelCommand(clamp(self.u_R, params.U), clamp(self.u_L, params.U))


def body_inputs(cmd: WheelCommand, params: RobotParams) -> tuple[float, float]:
    """Map wheel voltages to the thrust and turning inputs ``(u_v, u_omega)``."""
    return (cmd.u_R + cmd.u_L) / 2.0, (cmd.u_R - cmd.u_L) / params.d


def wheel_command(u_v: float, u_omega: float, params: RobotParams) -> WheelCommand:
    """Saturate the body inputs, map them to wheels and saturate each wheel.

    Follows the actuator cascade: ``U sat(u_v/U)`` and ``U_w sat(u_w/U_w)`` with
    ``U_w = 2U/d``, then ``u_R,L = u_v +- (d/2) u_w``, then a final per-wheel
    clamp at ``U``.
    """
    u_v = clamp(u_v, params.U)
    u_omega = clamp(u_omega, params.omega_voltage_bound)
    half = params.d / 2.0
    return WheelCommand(
        clamp(u_v + half * u_omega, params.U),
        clamp(u_v - half * u_omega, params.U),
    )


def velocity_bounds(params: RobotParams) -> tuple[float, float]:
    """Nominal speed bounds ``(bU/a, 2bU/(ad))`` reachable under saturated inputs."""
    return params.b * params.U / params.a, 2.0 * params.b * params.U / (params.a * params.d)


# --- disturbances -----------------------------------------------------------


class Signal(Protocol):
    bound: float
    lipschitz: float

    def __call__(self, t: float) -> float: ...


@dataclass(frozen=True)
class Zero:
    bound: float = 0.0
    lipschitz: float = 0.0

    def __call__(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class Constant:
    value: float

    @property
    def bound(self) -> float:
        return abs(self.value)

    lipschitz: float = 0.0

    def __call__(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin(2 pi frequency t + phase)``."""

    amplitude: float
    frequency: float  # Hz
    phase: float = 0.0

    @property
    def bound(self) -> float:
        return abs(self.amplitude)

    @property
    def lipschitz(self) -> float:
        return abs(self.amplitude) * 2.0 * math.pi * abs(self.frequency)

    def __call__(self, t: float) -> float:
        return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)


@dataclass(frozen=True)
class RandomWalk:
    """Piecewise-linear random walk with slope in [-lipschitz, lipschitz].

    Knots are drawn every ``knot_spacing`` seconds; the value is reflected at
    ``+-bound`` so both the amplitude and the slope bounds hold exactly.
    """

    bound: float
    lipschitz: float
    seed: int = 0
    knot_spacing: float = 0.05
    horizon: float = 120.0
    _knots: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rng = random.Random(self.seed)
        n = int(math.ceil(self.horizon / self.knot_spacing)) + 2
        values = [rng.uniform(-self.bound, self.bound)]
        for _ in range(n):
            step = rng.uniform(-self.lipschitz, self.lipschitz) * self.knot_spacing
            nxt = values[-1] + step
            if nxt > self.bound:
                nxt = 2.0 * self.bound - nxt
            elif nxt < -self.bound:
                nxt = -2.0 * self.bound - nxt
            values.append(nxt)
        object.__setattr__(self, "_knots", tuple(values))

    def __call__(self, t: float) -> float:
        s = max(t, 0.0) / self.knot_spacing
        i = min(int(s), len(self._knots) - 2)
        frac = min(s - i, 1.0)
        return self._knots[i] + frac * (self._knots[i + 1] - self._knots[i])


@dataclass(frozen=True)
class Disturbance:
    """Per-wheel disturbance accelerations ``(Delta_R, Delta_L)``."""

    right: Signal = Zero()
    left: Signal = Zero()

    def __call__(self, t: float) -> tuple[float, float]:
        return self.right(t), self.left(t)

    @property
    def lipschitz(self) -> float:
        return max(self.right.lipschitz, self.left.lipschitz)

    @property
    def bound(self) -> float:
        return max(self.right.bound, self.left.bound)


NO_DISTURBANCE = Disturbance()


# --- model and integration ---------------------------------------------------


def derivative(
    state: RobotState,
    cmd: WheelCommand,
    dist: tuple[float, float],
    params: RobotParams,
) -> tuple[float, float, float, float, float]:
    """Right-hand side of the full model for a sampled disturbance pair."""
    return _rhs(state.theta, state.v, state.omega, cmd, dist, params)


def _rhs(theta, v, omega, cmd, dist, params):
    u_v, u_omega = body_inputs(cmd, params)
    d_right, d_left = dist
    dv = (d_right + d_left) / 2.0
    domega = (d_right - d_left) / params.d
    return (
        v * math.cos(theta),
        v * math.sin(theta),
        omega,
        -params.a * v + params.b * u_v + dv,
        -params.a * omega + params.b * u_omega + domega,
    )


def step(
    state: RobotState,
    cmd: WheelCommand,
    dist: Disturbance | Callable[[float], tuple[float, float]],
    params: RobotParams,
    dt: float,
    t: float = 0.0,
) -> RobotState:
    """Advance one classic RK4 step of length ``dt`` with the command held."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x, y, th, v, w = state.x, state.y, state.theta, state.v, state.omega
    h2 = dt / 2.0
    d0 = dist(t)
    dmid = dist(t + h2)
    d1 = dist(t + dt)
    k1 = _rhs(th, v, w, cmd, d0, params)
    k2 = _rhs(th + h2 * k1[2], v + h2 * k1[3], w + h2 * k1[4], cmd, dmid, params)
    k3 = _rhs(th + h2 * k2[2], v + h2 * k2[3], w + h2 * k2[4], cmd, dmid, params)
    k4 = _rhs(th + dt * k3[2], v + dt * k3[3], w + dt * k3[4], cmd, d1, params)
    c = dt / 6.0
    return RobotState(
        x + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        y + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        wrap_angle(th + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])),
        v + c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]),
        w + c * (k1[4] + 2 * k2[4] + 2 * k3[4] + k4[4]),
    )


__all__ = [
    "Constant",
    "Disturbance",
    "NO_DISTURBANCE",
    "RandomWalk",
    "RobotParams",
    "RobotState",
    "Sinusoid",
    "WheelCommand",
    "Zero",
    "angle_diff",
    "body_inputs",
    "clamp",
    "derivative",
    "sat",
    "sign",
    "step",
    "velocity_bounds",
    "wheel_command",
    "wrap_angle",
]
