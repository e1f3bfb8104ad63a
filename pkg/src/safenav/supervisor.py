"""Switching logic between trajectory tracking and safety control.

``A0`` runs the tracking controller. ``A1`` runs safety control while the
reference point is inside the feature's avoidance zone; ``A2`` keeps safety
control after the reference has left the zone until heading for the reference
no longer cuts back into the zone, which is read off the lateral body-frame
error ``e_y``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from safenav.geometry import DistanceReading, Feature, Mode, Turn


class Phase(str, enum.Enum):
    A0 = "A0"
    A1 = "A1"
    A2 = "A2"

    @property
    def safety(self) -> bool:
        return self is not Phase.A0


class GeofenceRule(str, enum.Enum):
    # hold e_y < 0 / release e_y >= 0 for counterclockwise keep-in
    CAPTION = "caption"
    # hold e_y > 0 / release e_y >= 0 for counterclockwise keep-in
    TEXT = "text"


@dataclass(frozen=True)
class Transition:
    t: float
    source: Phase
    target: Phase
    feature: str
    trigger: dict


def turn_direction(configured: str | Turn | None) -> Turn:
    """Configured turn sense, counterclockwise when unspecified."""
    if configured is None:
        return Turn.COUNTERCLOCKWISE
    return Turn(configured)


def release_test(feature: Feature, e_y: float, rule: GeofenceRule = GeofenceRule.CAPTION) -> tuple[bool, bool]:
    """Return ``(hold, release)`` for the lateral error ``e_y``."""
    if feature.mode is Mode.KEEP_INSIDE and rule is GeofenceRule.TEXT:
        if feature.turn is Turn.COUNTERCLOCKWISE:
            return e_y > 0.0, e_y >= 0.0
        return e_y < 0.0, e_y <= 0.0
    if feature.geometric_turn is Turn.COUNTERCLOCKWISE:
        return e_y > 0.0, e_y <= 0.0
    return e_y < 0.0, e_y >= 0.0


@dataclass
class Supervisor:
    dwell: float = 0.1
    rule: GeofenceRule = GeofenceRule.CAPTION
    phase: Phase = Phase.A0
    feature: str | None = None
    turn: Turn | None = None
    entry_time: float = -math.inf
    log: list[Transition] = field(default_factory=list)
    deferred: int = 0

    def _go(self, t: float, target: Phase, feature: Feature, trigger: dict) -> None:
        self.log.append(Transition(t, self.phase, target, feature.name, trigger))
        self.phase = target
        self.entry_time = t
        if target is Phase.A0:
            self.feature = None
            self.turn = None
        else:
            self.feature = feature.name
            self.turn = feature.turn

    def decide(
        self,
        t: float,
        feature: Feature,
        reading: DistanceReading,
        ref_in_zone: bool,
        e_y: float,
    ) -> Phase:
        """Evaluate the transition predicates for the dominant feature at time ``t``.

        Triggers arriving inside the dwell window are dropped, not latched; they
        are evaluated afresh on the next call.
        """
        in_band = reading.clearance <= feature.safe_distance + feature.band
        _, release = release_test(feature, e_y, self.rule)
        trigger = {
            "clearance": reading.clearance,
            "in_band": in_band,
            "ref_in_zone": ref_in_zone,
            "e_y": e_y,
        }

        target = self.phase
        if self.phase is Phase.A0:
            if in_band and ref_in_zone:
                target = Phase.A1
        elif self.phase is Phase.A1:
            if not ref_in_zone:
                target = Phase.A0 if release else Phase.A2
        else:
            if ref_in_zone:
                target = Phase.A1
            elif release:
                target = Phase.A0

        if target is not self.phase:
            if t - self.entry_time < self.dwell:
                self.deferred += 1
            else:
                self._go(t, target, feature, trigger)
        return self.phase


def decide(
    sup: Supervisor,
    t: float,
    feature: Feature,
    reading: DistanceReading,
    ref_in_zone: bool,
    e_y: float,
) -> Supervisor:
    sup.decide(t, feature, reading, ref_in_zone, e_y)
    return sup
