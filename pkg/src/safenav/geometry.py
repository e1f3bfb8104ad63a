"""Environment features and the distance kernel used by the safety layer."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from safenav.dynamics import RobotState, angle_diff, wrap_angle
from safenav.errors import ConfigurationError, DegenerateDistanceError

Point = tuple[float, float]


class Mode(str, enum.Enum):
    AVOID_OUTSIDE = "avoid-outside"
    KEEP_INSIDE = "keep-inside"


class Turn(str, enum.Enum):
    COUNTERCLOCKWISE = "counterclockwise"
    CLOCKWISE = "clockwise"

    @property
    def sign(self) -> float:
        return 1.0 if self is Turn.COUNTERCLOCKWISE else -1.0

    def flipped(self) -> "Turn":
        return Turn.CLOCKWISE if self is Turn.COUNTERCLOCKWISE else Turn.COUNTERCLOCKWISE


@dataclass(frozen=True)
class Disc:
    center: Point
    radius: float = 0.0


@dataclass(frozen=True)
class Polygon:
    """Closed polyline; the closing edge from the last vertex to the first is implied."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ConfigurationError("polygon needs at least three vertices")
        if _self_intersects(self.vertices):
            raise ConfigurationError("polygon edges intersect")

    @property
    def orientation(self) -> float:
        """+1 for counterclockwise vertex order, -1 for clockwise."""
        return 1.0 if signed_area(self.vertices) > 0.0 else -1.0

    def edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]


@dataclass(frozen=True)
class MovingPoint:
    """Another robot; its position is supplied per step by the simulator."""

    robot: str


@dataclass(frozen=True)
class Feature:
    name: str
    shape: Disc | Polygon | MovingPoint
    safe_distance: float
    band: float
    mode: Mode = Mode.AVOID_OUTSIDE
    turn: Turn = Turn.COUNTERCLOCKWISE

    def check(self, wheel_separation: float) -> list[str]:
        problems = []
        if not self.safe_distance > wheel_separation / 2.0:
            problems.append(
                f"{self.name}: safe distance {self.safe_distance:g} m must exceed d/2 = {wheel_separation / 2:g} m"
            )
        if not 0.0 < self.band <= 0.2 * self.safe_distance:
            problems.append(
                f"{self.name}: band {self.band:g} m must lie in (0, 0.2 * safe distance = {0.2 * self.safe_distance:g}]"
            )
        if self.mode is Mode.KEEP_INSIDE and not isinstance(self.shape, Polygon):
            problems.append(f"{self.name}: keep-inside features must be polygons")
        if isinstance(self.shape, Disc) and self.shape.radius < 0.0:
            problems.append(f"{self.name}: negative radius")
        return problems

    @property
    def geometric_turn(self) -> Turn:
        """Turn sense relative to the closest point (feature on the left for CCW).

        For keep-inside borders the configured turn names the circulation around
        the enclosed region, which keeps the border on the robot's right, i.e. the
        opposite geometric sense.
        """
        return self.turn.flipped() if self.mode is Mode.KEEP_INSIDE else self.turn


@dataclass(frozen=True)
class DistanceReading:
    """Closest point ``p_o``, distance ``d_o``, bearing ``beta_o`` of ``p - p_o``
    and the relative heading ``delta = theta - beta_o``.

    ``penetrated`` marks positions on the unsafe side (inside a disc, outside a
    border); ``clearance`` is then negative.
    """

    p_o: Point
    d_o: float
    beta_o: float
    delta: float
    feature: str
    penetrated: bool = False
    segment: int = -1

    @property
    def clearance(self) -> float:
        return -self.d_o if self.penetrated else self.d_o


def signed_area(vertices: Sequence[Point]) -> float:
    n = len(vertices)
    return 0.5 * sum(
        vertices[i][0] * vertices[(i + 1) % n][1] - vertices[(i + 1) % n][0] * vertices[i][1]
        for i in range(n)
    )


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1, d2 = _cross(q1, q2, p1), _cross(q1, q2, p2)
    d3, d4 = _cross(p1, p2, q1), _cross(p1, p2, q2)
    return d1 * d2 < 0.0 and d3 * d4 < 0.0


def _self_intersects(vertices: Sequence[Point]) -> bool:
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(*edges[i], *edges[j]):
                return True
    return False


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> bool:
    x, y = p
    inside = False
    n = len(vertices)
    for i in range(n):
        (x1, y1), (x2, y2) = vertices[i], vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return inside


def closest_on_polygon(p: Point, vertices: Sequence[Point]) -> tuple[Point, float, int]:
    """Nearest boundary point, its distance and the segment index (lowest index wins ties)."""
    px, py = p
    best_d2 = math.inf
    best = (0.0, 0.0)
    best_i = -1
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        ll = ex * ex + ey * ey
        s = ((px - ax) * ex + (py - ay) * ey) / ll if ll > 0.0 else 0.0
        s = 0.0 if s < 0.0 else 1.0 if s > 1.0 else s
        cx, cy = ax + s * ex, ay + s * ey
        d2 = (px - cx) ** 2 + (py - cy) ** 2
        if d2 < best_d2:
            best_d2, best, best_i = d2, (cx, cy), i
    return best, math.sqrt(best_d2), best_i


def closest(
    p: Point,
    feature: Feature,
    theta: float = 0.0,
    moving: dict[str, Point] | None = None,
) -> DistanceReading:
    """Closest-point query of position ``p`` (heading ``theta``) against ``feature``.

    Raises:
        DegenerateDistanceError: ``p`` coincides with a point feature or disc center.
    """
    shape = feature.shape
    px, py = p
    if isinstance(shape, (Disc, MovingPoint)):
        if isinstance(shape, MovingPoint):
            if moving is None or shape.robot not in moving:
                raise KeyError(f"no position supplied for moving feature {shape.robot!r}")
            (cx, cy), radius = moving[shape.robot], 0.0
        else:
            (cx, cy), radius = shape.center, shape.radius
        dx, dy = px - cx, py - cy
        r = math.hypot(dx, dy)
        if r == 0.0:
            raise DegenerateDistanceError(f"position coincides with the center of {feature.name}")
        beta = wrap_angle(math.atan2(dy, dx))
        p_o = (cx + radius * dx / r, cy + radius * dy / r)
        d_signed = r - radius
        return DistanceReading(
            p_o, abs(d_signed), beta, angle_diff(theta, beta), feature.name, d_signed < 0.0
        )

    p_o, dist, seg = closest_on_polygon(p, shape.vertices)
    inside = point_in_polygon(p, shape.vertices)
    penetrated = inside if feature.mode is Mode.AVOID_OUTSIDE else not inside
    if dist == 0.0:
        # on the boundary itself: bearing along the edge normal toward the safe side
        (ax, ay), (bx, by) = shape.vertices[seg], shape.vertices[(seg + 1) % len(shape.vertices)]
        inward = math.atan2((bx - ax) * shape.orientation, -(by - ay) * shape.orientation)
        beta = inward if feature.mode is Mode.KEEP_INSIDE else inward + math.pi
        beta = wrap_angle(beta)
    else:
        dx, dy = px - p_o[0], py - p_o[1]
        if penetrated:
            dx, dy = -dx, -dy
        beta = wrap_angle(math.atan2(dy, dx))
    return DistanceReading(p_o, dist, beta, angle_diff(theta, beta), feature.name, penetrated, seg)


def clearance(p: Point, feature: Feature, moving: dict[str, Point] | None = None) -> float:
    """Signed distance to ``feature``; negative on the unsafe side."""
    try:
        return closest(p, feature, 0.0, moving).clearance
    except DegenerateDistanceError:
        shape = feature.shape
        return -shape.radius if isinstance(shape, Disc) else 0.0


def in_avoidance(value: DistanceReading | float, feature: Feature) -> bool:
    """Whether a reading (or a signed clearance) lies within the avoidance zone."""
    c = value.clearance if isinstance(value, DistanceReading) else value
    return c <= feature.safe_distance + feature.band


def body_error(state: RobotState, ref) -> tuple[float, float]:
    """Reference position expressed in the robot body frame ``(e_x, e_y)``.

    ``e_y > 0`` means the reference lies to the robot's left.
    """
    dx, dy = ref.x - state.x, ref.y - state.y
    c, s = math.cos(state.theta), math.sin(state.theta)
    return c * dx + s * dy, -s * dx + c * dy


@dataclass(frozen=True)
class MovingRates:
    v_o: float
    omega_o: float  # nan when the point is (nearly) at rest
    degenerate: bool


def moving_rates(samples: Sequence[Point], dt: float, eps: float = 1e-9) -> MovingRates:
    """Central-difference speed and turn rate of a sampled point stream.

    Uses the last three samples; diagnostics only, the controllers never read it.
    """
    if len(samples) < 3:
        raise ValueError("need at least three samples")
    (x0, y0), (x1, y1), (x2, y2) = samples[-3:]
    dx, dy = (x2 - x0) / (2 * dt), (y2 - y0) / (2 * dt)
    ddx, ddy = (x2 - 2 * x1 + x0) / dt**2, (y2 - 2 * y1 + y0) / dt**2
    speed2 = dx * dx + dy * dy
    if speed2 < eps:
        return MovingRates(math.sqrt(speed2), math.nan, True)
    return MovingRates(math.sqrt(speed2), (ddy * dx - ddx * dy) / speed2, False)


@dataclass
class ClosestPointTracker:
    """Flags jumps of the closest point between consecutive queries.

    Polygon reflex-vertex regions legitimately produce such jumps; they are
    recorded rather than treated as errors.
    """

    threshold: float
    jumps: list[tuple[float, str, float]] = field(default_factory=list)
    _last: dict[str, Point] = field(default_factory=dict)

    def observe(self, t: float, reading: DistanceReading) -> None:
        prev = self._last.get(reading.feature)
        if prev is not None:
            jump = math.dist(prev, reading.p_o)
            if jump > self.threshold:
                self.jumps.append((t, reading.feature, jump))
        self._last[reading.feature] = reading.p_o
