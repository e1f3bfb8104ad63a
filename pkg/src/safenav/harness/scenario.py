"""Scenario files: TOML documents with units spelled out in the key names.

Unknown keys are rejected. After schema parsing every admissibility check of
the control stack runs, and all failures are reported together.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from safenav.dynamics import (
    Constant,
    Disturbance,
    RandomWalk,
    RobotParams,
    RobotState,
    Sinusoid,
    Zero,
)
from safenav.errors import ConfigurationError
from safenav.geometry import Disc, Feature, Mode, Polygon, Turn
from safenav.linearization import look_ahead_interval
from safenav.reference import ConstantRates, Profile, SinusoidRates, segments_profile
from safenav.safety import BORDER_GAINS, OBSTACLE_GAINS, SafetyGains
from safenav.sta import validate_gains
from safenav.supervisor import GeofenceRule
from safenav.tracking import TrackingGains

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InitialSpec(_Strict):
    x_m: float = 0.0
    y_m: float = 0.0
    theta_rad: float = 0.0
    v_mps: float = 0.0
    omega_radps: float = 0.0


class ParamsSpec(_Strict):
    a_per_s: float = 3.85
    b_mps2_per_v: float = 3.85
    d_m: float = 0.235
    U_v: float = 0.7


class TrackingSpec(_Strict):
    c_per_s: float = 10.0
    k1: float = 2.0
    k2: float = 0.5


class SafetySpec(_Strict):
    preset: Literal["obstacle", "border"] = "obstacle"
    c_zeta_per_s: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    c_v_per_s: Optional[float] = None
    c_omega_per_s: Optional[float] = None
    feedforward: bool = False


class SegmentSpec(_Strict):
    start_s: float = 0.0
    kind: Literal["constant", "sinusoid"] = "constant"
    v_mps: float
    omega_radps: float = 0.0
    v_amp_mps: float = 0.0
    omega_amp_radps: float = 0.0
    frequency_hz: float = 0.1
    phase_rad: float = 0.0


class ReferenceSpec(_Strict):
    x_m: float = 0.0
    y_m: float = 0.0
    theta_rad: float = 0.0
    segments: list[SegmentSpec] = Field(min_length=1)


class SignalSpec(_Strict):
    kind: Literal["zero", "constant", "sinusoid", "random_walk"] = "zero"
    value_mps2: float = 0.0
    amplitude_mps2: float = 0.0
    frequency_hz: float = 0.0
    phase_rad: float = 0.0
    bound_mps2: float = 0.0
    lipschitz_mps3: float = 0.0
    seed_offset: int = 0


class DisturbanceSpec(_Strict):
    right: SignalSpec = Field(default_factory=SignalSpec)
    left: SignalSpec = Field(default_factory=SignalSpec)


class RobotSpec(_Strict):
    name: str
    initial: InitialSpec = Field(default_factory=InitialSpec)
    params: ParamsSpec = Field(default_factory=ParamsSpec)
    tracking: TrackingSpec = Field(default_factory=TrackingSpec)
    safety: SafetySpec = Field(default_factory=SafetySpec)
    reference: ReferenceSpec
    disturbance: DisturbanceSpec = Field(default_factory=DisturbanceSpec)
    shadow_speed: bool = False
    inter_robot_turn: Optional[Literal["counterclockwise", "clockwise"]] = None
    disturbance_lipschitz_mps3: Optional[float] = None


class FeatureSpec(_Strict):
    name: str
    kind: Literal["disc", "polygon", "rounded_rectangle"]
    safe_distance_m: float
    band_m: float
    mode: Literal["avoid-outside", "keep-inside"] = "avoid-outside"
    turn: Optional[Literal["counterclockwise", "clockwise"]] = None
    center_m: Optional[tuple[float, float]] = None
    radius_m: float = 0.0
    vertices_m: Optional[list[tuple[float, float]]] = None
    width_m: Optional[float] = None
    height_m: Optional[float] = None
    corner_radius_m: float = 0.0
    corner_segments: int = 12


class InterRobotSpec(_Strict):
    safe_distance_m: float
    band_m: float


class ScenarioSpec(_Strict):
    name: str
    description: str = ""
    duration_s: float = 20.0
    dt_s: float = 1e-3
    seed: int = 0
    dwell_s: float = 0.1
    geofence_rule: Literal["caption", "text"] = "caption"
    inter_robot: Optional[InterRobotSpec] = None
    robots: list[RobotSpec] = Field(min_length=1)
    features: list[FeatureSpec] = Field(default_factory=list)


# --- domain objects ------------------------------------------------------------


@dataclass
class RobotSetup:
    name: str
    initial: RobotState
    params: RobotParams
    reference_start: tuple[float, float, float]
    profile: Profile
    tracking: TrackingGains = field(default_factory=TrackingGains)
    safety: SafetyGains = field(default_factory=SafetyGains)
    disturbance: Disturbance = field(default_factory=Disturbance)
    shadow_speed: bool = False
    inter_robot_turn: Turn = Turn.COUNTERCLOCKWISE
    disturbance_lipschitz: float | None = None


@dataclass
class Scenario:
    name: str
    robots: list[RobotSetup]
    features: list[Feature] = field(default_factory=list)
    dt: float = 1e-3
    duration: float = 20.0
    seed: int = 0
    dwell: float = 0.1
    geofence_rule: GeofenceRule = GeofenceRule.CAPTION
    inter_robot: tuple[float, float] | None = None
    description: str = ""

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


def rounded_rectangle(
    center: tuple[float, float], width: float, height: float, radius: float, segments: int = 12
) -> tuple[tuple[float, float], ...]:
    """Counterclockwise vertices of a rectangle with circular-arc corners."""
    cx, cy = center
    hw, hh = width / 2.0, height / 2.0
    if radius <= 0.0:
        return ((cx - hw, cy - hh), (cx + hw, cy - hh), (cx + hw, cy + hh), (cx - hw, cy + hh))
    corners = [
        (cx + hw - radius, cy - hh + radius, -math.pi / 2),
        (cx + hw - radius, cy + hh - radius, 0.0),
        (cx - hw + radius, cy + hh - radius, math.pi / 2),
        (cx - hw + radius, cy - hh + radius, math.pi),
    ]
    pts = []
    for ox, oy, start in corners:
        for k in range(segments + 1):
            a = start + (math.pi / 2) * k / segments
            pts.append((ox + radius * math.cos(a), oy + radius * math.sin(a)))
    return tuple(pts)


def wheel_lipschitz(dist: Disturbance, params: RobotParams) -> float:
    """Rate bound of the wheel disturbance seen on the look-ahead channels.

    ``max(L_v, L * L_omega)`` with ``L_v = (L_R + L_L)/2`` and
    ``L_omega = (L_R + L_L)/d``.
    """
    total = dist.right.lipschitz + dist.left.lipschitz
    return max(total / 2.0, params.look_ahead * total / params.d)


def _signal(spec: SignalSpec, seed: int):
    if spec.kind == "zero":
        return Zero()
    if spec.kind == "constant":
        return Constant(spec.value_mps2)
    if spec.kind == "sinusoid":
        return Sinusoid(spec.amplitude_mps2, spec.frequency_hz, spec.phase_rad)
    return RandomWalk(spec.bound_mps2, spec.lipschitz_mps3, seed=seed + spec.seed_offset)


def _segment(spec: SegmentSpec) -> Profile:
    if spec.kind == "constant":
        return ConstantRates(spec.v_mps, spec.omega_radps)
    return SinusoidRates(
        spec.v_mps, spec.omega_radps, spec.v_amp_mps, spec.omega_amp_radps, spec.frequency_hz, spec.phase_rad
    )


def _safety(spec: SafetySpec) -> SafetyGains:
    base = OBSTACLE_GAINS if spec.preset == "obstacle" else BORDER_GAINS

    def pick(value, default):
        return default if value is None else value

    return SafetyGains(
        c_zeta=pick(spec.c_zeta_per_s, base.c_zeta),
        k1=pick(spec.k1, base.k1),
        k2=pick(spec.k2, base.k2),
        c_v=pick(spec.c_v_per_s, base.c_v),
        c_omega=pick(spec.c_omega_per_s, base.c_omega),
        feedforward=spec.feedforward,
    )


def _feature(spec: FeatureSpec) -> Feature:
    if spec.kind == "disc":
        if spec.center_m is None:
            raise ConfigurationError(f"feature {spec.name}: disc needs center_m")
        shape = Disc(tuple(spec.center_m), spec.radius_m)
    elif spec.kind == "polygon":
        if not spec.vertices_m:
            raise ConfigurationError(f"feature {spec.name}: polygon needs vertices_m")
        shape = Polygon(tuple(tuple(v) for v in spec.vertices_m))
    else:
        if spec.width_m is None or spec.height_m is None:
            raise ConfigurationError(f"feature {spec.name}: rounded_rectangle needs width_m and height_m")
        shape = Polygon(
            rounded_rectangle(
                tuple(spec.center_m or (0.0, 0.0)),
                spec.width_m,
                spec.height_m,
                spec.corner_radius_m,
                spec.corner_segments,
            )
        )
    turn = Turn(spec.turn) if spec.turn else Turn.COUNTERCLOCKWISE
    return Feature(spec.name, shape, spec.safe_distance_m, spec.band_m, Mode(spec.mode), turn)


def build(spec: ScenarioSpec) -> Scenario:
    robots = []
    for i, r in enumerate(spec.robots):
        params = RobotParams(r.params.a_per_s, r.params.b_mps2_per_v, r.params.d_m, r.params.U_v)
        seed = spec.seed * 1000 + 10 * i
        robots.append(
            RobotSetup(
                name=r.name,
                initial=RobotState(
                    r.initial.x_m, r.initial.y_m, r.initial.theta_rad, r.initial.v_mps, r.initial.omega_radps
                ),
                params=params,
                reference_start=(r.reference.x_m, r.reference.y_m, r.reference.theta_rad),
                profile=segments_profile([(s.start_s, _segment(s)) for s in r.reference.segments]),
                tracking=TrackingGains(r.tracking.c_per_s, r.tracking.k1, r.tracking.k2),
                safety=_safety(r.safety),
                disturbance=Disturbance(_signal(r.disturbance.right, seed), _signal(r.disturbance.left, seed + 1)),
                shadow_speed=r.shadow_speed,
                inter_robot_turn=Turn(r.inter_robot_turn) if r.inter_robot_turn else Turn.COUNTERCLOCKWISE,
                disturbance_lipschitz=r.disturbance_lipschitz_mps3,
            )
        )
    inter = (spec.inter_robot.safe_distance_m, spec.inter_robot.band_m) if spec.inter_robot else None
    return Scenario(
        name=spec.name,
        robots=robots,
        features=[_feature(f) for f in spec.features],
        dt=spec.dt_s,
        duration=spec.duration_s,
        seed=spec.seed,
        dwell=spec.dwell_s,
        geofence_rule=GeofenceRule(spec.geofence_rule),
        inter_robot=inter,
        description=spec.description,
    )


@dataclass(frozen=True)
class Check:
    subject: str
    name: str
    ok: bool
    detail: str
    margin: float = math.nan


def admissibility(scenario: Scenario) -> list[Check]:
    """Run every configuration-time check; each entry carries its margin."""
    checks: list[Check] = []

    def add(subject, name, ok, detail, margin=math.nan, advisory=False):
        checks.append(Check(subject, name + (" (advisory)" if advisory else ""), ok or advisory, detail, margin))

    if not scenario.dt > 0.0:
        add("scenario", "dt > 0", False, f"dt={scenario.dt}")
    if scenario.duration < 0.0:
        add("scenario", "duration >= 0", False, f"duration={scenario.duration}")
    names = [r.name for r in scenario.robots] + [f.name for f in scenario.features]
    if len(set(names)) != len(names):
        add("scenario", "unique names", False, "robot and feature names must be unique")
    if len(scenario.robots) > 1 and scenario.inter_robot is None:
        add("scenario", "inter_robot", False, "multi-robot scenarios need an [inter_robot] section")

    for r in scenario.robots:
        p = r.params
        problems = p.check()
        limit = p.a**2 * p.d / p.b if p.b > 0 else math.nan
        add(r.name, "0 < U < a^2 d / b", not problems, "; ".join(problems) or f"U={p.U:g} < {limit:.6g}", limit - p.U)
        for f in scenario.features:
            for problem in f.check(p.d):
                add(f.name, "feature admissibility", False, problem)
            if not f.check(p.d):
                add(f.name, f"safe distance > d/2 for {r.name}", True, f"{f.safe_distance:g} > {p.d / 2:g}",
                    f.safe_distance - p.d / 2)
        if problems:
            continue
        lo, hi = look_ahead_interval(p)
        L = p.look_ahead
        add(
            r.name,
            "L = d/2 inside look-ahead interval",
            lo < L < hi,
            f"{lo:.6g} < {L:.6g} < {hi:.6g}",
            min(L - lo, hi - L),
        )
        lip = r.disturbance_lipschitz
        if lip is None:
            lip = wheel_lipschitz(r.disturbance, p)
        report = validate_gains(r.tracking.sta(None), lip)
        add(
            r.name,
            "tracking gains k2 > L_delta, k1 > 2 sqrt(k2)",
            report.ok,
            "; ".join(report.violations)
            or f"k2 - L_delta = {report.integral_margin:.4g}, k1 - 2 sqrt(k2) = {report.proportional_margin:.4g}",
            min(report.integral_margin, report.proportional_margin),
        )
        sg = r.safety
        srep = validate_gains(sg.sta(1.0), lip)
        add(
            r.name,
            "safety gains k2 > L_delta, k1 > 2 sqrt(k2)",
            srep.ok,
            "; ".join(srep.violations)
            or f"k2 - L_delta = {srep.integral_margin:.4g}, k1 - 2 sqrt(k2) = {srep.proportional_margin:.4g}",
            min(srep.integral_margin, srep.proportional_margin),
            advisory=True,
        )
        positive = all(g > 0 for g in (sg.c_zeta, sg.k1, sg.k2, sg.c_v, sg.c_omega))
        add(r.name, "safety gains positive", positive, repr(sg))
        try:
            v0, *_ = r.profile.rates(0.0)
        except Exception as exc:  # malformed profile
            add(r.name, "reference profile", False, str(exc))
        else:
            add(r.name, "reference speed positive at t=0", v0 > 0.0, f"v_r(0) = {v0:g}", v0)

        if scenario.inter_robot is not None:
            sd, band = scenario.inter_robot
            ok = sd > p.d / 2 and 0.0 < band <= 0.2 * sd
            add(r.name, "inter-robot safe distance and band", ok, f"safe={sd:g} m, band={band:g} m", sd - p.d / 2)
    return checks


def validate(scenario: Scenario) -> Scenario:
    failed = [f"{c.subject}: {c.name}: {c.detail}" for c in admissibility(scenario) if not c.ok]
    if failed:
        raise ConfigurationError(f"scenario {scenario.name!r} failed {len(failed)} check(s)", failed)
    return scenario


def parse_scenario(data: dict) -> Scenario:
    """Build and validate a scenario from an already-parsed document."""
    try:
        spec = ScenarioSpec.model_validate(data)
    except ValidationError as exc:
        problems = [f"{'.'.join(str(x) for x in e['loc'])}: {e['msg']}" for e in exc.errors()]
        raise ConfigurationError("scenario schema errors", problems) from None
    return validate(build(spec))


def load_scenario(path: Union[str, Path]) -> Scenario:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
    return parse_scenario(data)
