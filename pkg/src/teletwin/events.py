"""Session event vocabulary shared by the scenario engine and the scorer."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class EventKind(str, Enum):
    # declaration order is the canonical intra-tick ordering
    TOUCH = "touch"
    GLASS_BREAK = "glass_break"
    GRASP = "grasp"
    RELEASE = "release"
    DROP = "drop"
    EXCESSIVE_FORCE = "excessive_force"
    TOWER_DETACH = "tower_detach"
    ACTION_COMPLETE = "action_complete"
    SCENARIO_COMPLETE = "scenario_complete"
    SCENARIO_FAILED = "scenario_failed"
    IK_WARNING = "ik_warning"


_ORDER = {kind: i for i, kind in enumerate(EventKind)}


@dataclass(frozen=True)
class SessionEvent:
    tick: int
    kind: EventKind
    subject: str = ""


def sort_events(events: list[SessionEvent]) -> list[SessionEvent]:
    """Strict canonical order: by tick, then by the fixed kind order."""
    return sorted(events, key=lambda e: (e.tick, _ORDER[e.kind]))
