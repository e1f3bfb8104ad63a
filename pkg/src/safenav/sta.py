"""Super-twisting sliding-mode control for a perturbed double integrator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from safenav.dynamics import sign


@dataclass(frozen=True)
class StaGains:
    """Gains of ``w = w_eq - k1 sqrt|s| sign(s) - k2 int sign(s)``.

    ``slope`` is the surface slope (lambda or c in the control literature) and
    ``bound`` the optional output bound used for anti-windup.
    """

    k1: float = 2.0
    k2: float = 0.5
    slope: float = 10.0
    bound: float | None = None


@dataclass(frozen=True)
class StaState:
    integral: float = 0.0
    t_last: float = 0.0


@dataclass(frozen=True)
class GainReport:
    ok: bool
    violations: tuple[str, ...]
    integral_margin: float  # k2 - L_delta
    proportional_margin: float  # k1 - 2 sqrt(k2)


def surface(e1: float, e2: float, slope: float) -> float:
    return e2 + slope * e1


def equivalent_control(ddz_ref: float, e2: float, slope: float) -> float:
    """Feedforward that zeroes the surface rate on the nominal plant."""
    return ddz_ref - slope * e2


def control(
    sigma: float, w_eq: float, gains: StaGains, state: StaState, dt: float
) -> tuple[float, StaState]:
    """One controller step.

    The output uses the integral accumulated so far; afterwards the integral is
    advanced by forward Euler. With ``gains.bound`` set the output is clamped and
    the integral is frozen whenever advancing it would push the output further
    into saturation (conditional integration).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    sgn = sign(sigma)
    w = w_eq - gains.k1 * math.sqrt(abs(sigma)) * sgn - gains.k2 * state.integral
    integral = state.integral + sgn * dt
    bound = gains.bound
    if bound is not None:
        if abs(w) > bound:
            # the integral moves w by -k2*sgn*dt; freeze if that deepens saturation
            if -sgn * w > 0.0:
                integral = state.integral
            w = math.copysign(bound, w)
        limit = bound / gains.k2 if gains.k2 > 0.0 else math.inf
        integral = max(-limit, min(limit, integral))
    return w, StaState(integral, state.t_last + dt)


def validate_gains(gains: StaGains, lipschitz: float) -> GainReport:
    """Check ``k2 > L_delta`` and ``k1 > 2 sqrt(k2)``; margins are reported either way."""
    if lipschitz < 0.0:
        raise ValueError("Lipschitz constant must be non-negative")
    violations = []
    m_int = gains.k2 - lipschitz
    m_prop = gains.k1 - 2.0 * math.sqrt(max(gains.k2, 0.0))
    if not m_int > 0.0:
        violations.append(f"k2 > L_delta fails: k2={gains.k2:g}, L_delta={lipschitz:g}")
    if not m_prop > 0.0:
        violations.append(
            f"k1 > 2 sqrt(k2) fails: k1={gains.k1:g}, 2 sqrt(k2)={2.0 * math.sqrt(max(gains.k2, 0.0)):g}"
        )
    if gains.slope <= 0.0:
        violations.append(f"surface slope must be positive (got {gains.slope:g})")
    return GainReport(not violations, tuple(violations), m_int, m_prop)


@dataclass
class SuperTwisting:
    """Stateful wrapper around :func:`control` for one channel."""

    gains: StaGains
    state: StaState = field(default_factory=StaState)

    def update(self, sigma: float, w_eq: float, dt: float) -> float:
        w, self.state = control(sigma, w_eq, self.gains, self.state, dt)
        return w

    def reset(self) -> None:
        self.state = StaState()

    @property
    def integral(self) -> float:
        return self.state.integral
