"""Reference trajectories generated from forward/turn-rate profiles.

A profile yields ``(v_r, omega_r, dv_r, domega_r)`` at time ``t``; the reference
pose is integrated from the unicycle kinematics, so every reference respects
the no-sideslip constraint by construction.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from safenav.dynamics import angle_diff, wrap_angle
from safenav.linearization import rotate

V_MIN = 0.05  # m/s, floor on the shadowed reference speed


class Profile(Protocol):
    def rates(self, t: float) -> tuple[float, float, float, float]: ...


@dataclass(frozen=True)
class ConstantRates:
    v: float
    omega: float

    def rates(self, t: float) -> tuple[float, float, float, float]:
        return self.v, self.omega, 0.0, 0.0


@dataclass(frozen=True)
class SinusoidRates:
    """``v = v_mean + v_amp sin(2 pi f t + phase)``, same form for ``omega``."""

    v_mean: float
    omega_mean: float
    v_amp: float = 0.0
    omega_amp: float = 0.0
    frequency: float = 0.1  # Hz
    phase: float = 0.0

    def rates(self, t: float) -> tuple[float, float, float, float]:
        w = 2.0 * math.pi * self.frequency
        arg = w * t + self.phase
        s, c = math.sin(arg), math.cos(arg)
        return (
            self.v_mean + self.v_amp * s,
            self.omega_mean + self.omega_amp * s,
            self.v_amp * w * c,
            self.omega_amp * w * c,
        )


@dataclass(frozen=True)
class Piecewise:
    """Sequence of profiles, each active from its start time (seconds, ascending)."""

    starts: tuple[float, ...]
    pieces: tuple[Profile, ...]

    def __post_init__(self):
        if len(self.starts) != len(self.pieces) or not self.starts:
            raise ValueError("need one start time per piece")
        if list(self.starts) != sorted(self.starts):
            raise ValueError("segment start times must be ascending")

    def rates(self, t: float) -> tuple[float, float, float, float]:
        i = max(bisect.bisect_right(self.starts, t) - 1, 0)
        return self.pieces[i].rates(t - self.starts[i])


@dataclass(frozen=True)
class ReferencePoint:
    x: float
    y: float
    theta: float
    v: float
    omega: float
    eta1: float
    xi1: float
    eta2: float
    xi2: float
    deta2: float
    dxi2: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


def make_reference(
    x: float,
    y: float,
    theta: float,
    v: float,
    omega: float,
    dv: float,
    domega: float,
    L: float,
) -> ReferencePoint:
    """Build a reference point with its look-ahead coordinates and accelerations."""
    px, py = rotate(theta, L, 0.0)
    eta2, xi2 = rotate(theta, v, L * omega)
    # d/dt R(theta)[v, L w] = R(theta)[dv - L w^2, L dw + v w]
    deta2, dxi2 = rotate(theta, dv - L * omega * omega, L * domega + v * omega)
    return ReferencePoint(x, y, wrap_angle(theta), v, omega, x + px, y + py, eta2, xi2, deta2, dxi2)


def initial_reference(
    x: float, y: float, theta: float, profile: Profile, L: float, t: float = 0.0
) -> ReferencePoint:
    v, omega, dv, domega = profile.rates(t)
    if v <= 0.0:
        raise ValueError(f"reference speed must be positive (got {v:g} at t={t:g})")
    return make_reference(x, y, theta, v, omega, dv, domega, L)


def advance(ref: ReferencePoint, profile: Profile, t: float, dt: float, L: float) -> ReferencePoint:
    """RK4 step of the reference kinematics from time ``t`` to ``t + dt``."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    v0, w0, _, _ = profile.rates(t)
    vm, wm, _, _ = profile.rates(t + dt / 2.0)
    v1, w1, dv1, dw1 = profile.rates(t + dt)
    if min(v0, vm, v1) <= 0.0:
        raise ValueError(f"reference speed must be positive on [{t:g}, {t + dt:g}]")

    th = ref.theta
    k1 = (v0 * math.cos(th), v0 * math.sin(th), w0)
    th2 = th + dt / 2.0 * k1[2]
    k2 = (vm * math.cos(th2), vm * math.sin(th2), wm)
    th3 = th + dt / 2.0 * k2[2]
    k3 = (vm * math.cos(th3), vm * math.sin(th3), wm)
    th4 = th + dt * k3[2]
    k4 = (v1 * math.cos(th4), v1 * math.sin(th4), w1)
    c = dt / 6.0
    x = ref.x + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    y = ref.y + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    theta = th + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return make_reference(x, y, theta, v1, w1, dv1, dw1, L)


def generate(
    x: float,
    y: float,
    theta: float,
    profile: Profile,
    L: float,
    dt: float,
    steps: int,
) -> list[ReferencePoint]:
    """Convenience: the reference sampled at ``0, dt, ..., steps*dt``."""
    ref = initial_reference(x, y, theta, profile, L)
    out = [ref]
    for k in range(steps):
        ref = advance(ref, profile, k * dt, dt, L)
        out.append(ref)
    return out


def shadow_speed(theta: float, theta_r: float, v_r: float, v_min: float = V_MIN) -> float:
    """Forward speed that keeps the robot abreast of the reference lead point."""
    return max(v_r * math.cos(angle_diff(theta, theta_r)), v_min)


def segments_profile(segments: Sequence[tuple[float, Profile]]) -> Profile:
    if len(segments) == 1 and segments[0][0] == 0.0:
        return segments[0][1]
    starts, pieces = zip(*segments)
    return Piecewise(tuple(starts), tuple(pieces))
