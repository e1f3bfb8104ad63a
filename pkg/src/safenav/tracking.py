"""Trajectory tracking: one super-twisting loop per look-ahead axis."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from safenav.dynamics import RobotParams, RobotState, WheelCommand, clamp, wheel_command
from safenav.linearization import forward, input_inverse, max_transformed_bound
from safenav.reference import ReferencePoint
from safenav.sta import StaGains, SuperTwisting, equivalent_control, surface

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrackingGains:
    c: float = 10.0
    k1: float = 2.0
    k2: float = 0.5

    def sta(self, bound: float | None) -> StaGains:
        return StaGains(self.k1, self.k2, self.c, bound)


@dataclass
class TrackingOutput:
    command: WheelCommand
    s_eta: float
    s_xi: float
    u_eta: float
    u_xi: float


def unstable_heading_error(ref: ReferencePoint, L: float) -> float:
    """Heading error of the repelling zero-dynamics equilibrium, ``-2 atan(v_r/(L w_r))``."""
    return -2.0 * math.atan2(ref.v, L * ref.omega)


@dataclass
class TrackingController:
    params: RobotParams
    gains: TrackingGains = field(default_factory=TrackingGains)
    eta: SuperTwisting = field(init=False)
    xi: SuperTwisting = field(init=False)

    def __post_init__(self):
        self.bound = max_transformed_bound(self.params)
        self.L = self.params.look_ahead
        self.eta = SuperTwisting(self.gains.sta(self.bound))
        self.xi = SuperTwisting(self.gains.sta(self.bound))

    def reset(self) -> None:
        self.eta.reset()
        self.xi.reset()

    def check_initial_heading(self, state: RobotState, ref: ReferencePoint) -> bool:
        """Warn when the heading error starts next to the repelling equilibrium."""
        near = abs(math.remainder(state.theta - ref.theta - unstable_heading_error(ref, self.L), 2 * math.pi))
        if near < 0.05:
            log.warning("initial heading error is %.3f rad from the unstable equilibrium", near)
            return False
        return True

    def update(self, state: RobotState, ref: ReferencePoint, dt: float) -> TrackingOutput:
        ts = forward(state, self.L)
        c = self.gains.c
        e_eta1, e_eta2 = ts.eta1 - ref.eta1, ts.eta2 - ref.eta2
        e_xi1, e_xi2 = ts.xi1 - ref.xi1, ts.xi2 - ref.xi2
        s_eta = surface(e_eta1, e_eta2, c)
        s_xi = surface(e_xi1, e_xi2, c)
        u_eta = self.eta.update(s_eta, equivalent_control(ref.deta2, e_eta2, c), dt)
        u_xi = self.xi.update(s_xi, equivalent_control(ref.dxi2, e_xi2, c), dt)
        u_eta = clamp(u_eta, self.bound)
        u_xi = clamp(u_xi, self.bound)
        u_v, u_omega = input_inverse(u_eta, u_xi, state, self.params, self.L)
        return TrackingOutput(wheel_command(u_v, u_omega, self.params), s_eta, s_xi, u_eta, u_xi)

    def command(self, state: RobotState, ref: ReferencePoint, dt: float) -> WheelCommand:
        return self.update(state, ref, dt).command


def track(
    state: RobotState,
    ref: ReferencePoint,
    controller: TrackingController,
    dt: float,
) -> WheelCommand:
    return controller.command(state, ref, dt)
