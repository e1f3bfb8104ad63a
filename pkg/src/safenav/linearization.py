"""Look-ahead change of variables that turns the robot into two double integrators.

A point at distance ``L`` ahead of the wheel axle is controlled instead of the
axle center. Its planar coordinates ``(eta1, xi1)`` and velocities
``(eta2, xi2)`` obey ``eta1'' = u_eta``, ``xi1'' = u_xi``; heading is left over
as a zero dynamic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from safenav.dynamics import RobotParams, RobotState, wrap_angle
from safenav.errors import ConfigurationError


@dataclass(frozen=True)
class TransformedState:
    eta1: float
    xi1: float
    eta2: float
    xi2: float
    theta: float


@dataclass(frozen=True)
class ControlBounds:
    L: float
    U_prime: float
    U_omega: float


def rotate(theta: float, a: float, b: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    return c * a - s * b, s * a + c * b


def rotate_back(theta: float, a: float, b: float) -> tuple[float, float]:
    # inverse rotation is the transpose
    c, s = math.cos(theta), math.sin(theta)
    return c * a + s * b, -s * a + c * b


def forward(state: RobotState, L: float) -> TransformedState:
    px, py = rotate(state.theta, L, 0.0)
    eta2, xi2 = rotate(state.theta, state.v, L * state.omega)
    return TransformedState(state.x + px, state.y + py, eta2, xi2, state.theta)


def inverse(ts: TransformedState, L: float) -> RobotState:
    px, py = rotate(ts.theta, L, 0.0)
    v, l_omega = rotate_back(ts.theta, ts.eta2, ts.xi2)
    return RobotState(ts.eta1 - px, ts.xi1 - py, wrap_angle(ts.theta), v, l_omega / L)


def input_inverse(
    u_eta: float, u_xi: float, state: RobotState, params: RobotParams, L: float
) -> tuple[float, float]:
    """Body inputs ``(u_v, u_omega)`` that realise the transformed accelerations."""
    w1, w2 = rotate_back(state.theta, u_eta, u_xi)
    v, omega = state.v, state.omega
    u_v = (params.a * v + L * omega * omega + w1) / params.b
    u_omega = (params.a * L * omega - v * omega + w2) / (params.b * L)
    return u_v, u_omega


def look_ahead_interval(params: RobotParams) -> tuple[float, float]:
    """Open interval of look-ahead offsets for which both acceleration margins are positive."""
    a, b, d, U = params.a, params.b, params.d, params.U
    return b * U / (2.0 * a * a), a * a * d * d / (2.0 * b * U)


def bound_branches(params: RobotParams, L: float) -> tuple[float, float]:
    a, b, d, U = params.a, params.b, params.d, params.U
    thrust = 2.0 * b * U - 4.0 * L * b * b * U * U / (a * a * d * d)
    turn = 4.0 * L * b * U / d - 2.0 * b * b * U * U / (a * a * d)
    return thrust, turn


def bound_profile(params: RobotParams, L: float) -> float:
    """Admissible infinity-norm bound on ``(u_eta, u_xi)`` for look-ahead ``L``.

    Raises:
        ConfigurationError: ``L`` lies outside :func:`look_ahead_interval`.
    """
    lo, hi = look_ahead_interval(params)
    if not lo < L < hi:
        raise ConfigurationError(
            f"look-ahead L={L:.6g} outside admissible interval ({lo:.6g}, {hi:.6g})"
        )
    return min(bound_branches(params, L))


def max_transformed_bound(params: RobotParams) -> float:
    """Closed form of the bound at ``L = d/2``: ``2bU(1 - bU/(a^2 d))``."""
    a, b, d, U = params.a, params.b, params.d, params.U
    return 2.0 * b * U * (1.0 - b * U / (a * a * d))


def control_bounds(params: RobotParams, L: float | None = None) -> ControlBounds:
    L = params.look_ahead if L is None else L
    return ControlBounds(L, bound_profile(params, L), params.omega_voltage_bound)
