"""Efficiency accumulation, penalty weighting and the final score breakdown.

Both efficiency metrics (total time, economy of motion) start from 50
points and lose points linearly past their budgets; penalties deduct
weight * count; any immediate-fail event zeroes the run.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .events import EventKind, SessionEvent
from .kinematics import Pose

FULL_METRIC_POINTS = 50.0


class PenaltyKind(str, Enum):
    DROP = "drop"
    EXCESSIVE_FORCE = "excessive_force"
    GLASS_BREAK = "glass_break"
    OUT_OF_VIEW = "out_of_view"


@dataclass(frozen=True)
class PenaltyWeights:
    points: dict[PenaltyKind, float] = field(default_factory=lambda: {
        PenaltyKind.DROP: 10.0,
        PenaltyKind.EXCESSIVE_FORCE: 5.0,
        PenaltyKind.GLASS_BREAK: 15.0,
        PenaltyKind.OUT_OF_VIEW: 2.0,
    })
    immediate_fail: frozenset[EventKind] = frozenset({EventKind.TOWER_DETACH})

    def __post_init__(self):
        if any(w < 0 for w in self.points.values()):
            raise ValueError("penalty weights must be >= 0")
        drop = self.points.get(PenaltyKind.DROP, 0.0)
        force = self.points.get(PenaltyKind.EXCESSIVE_FORCE, 0.0)
        if drop <= force:
            raise ValueError("drop weight must exceed excessive-force weight")


@dataclass(frozen=True)
class EfficiencyState:
    """Elapsed time plus summed frame motion (|dp| + beta*|dangle| per frame)."""
    elapsed: float = 0.0
    motion_accum: float = 0.0
    last_frames: tuple[Pose, ...] | None = field(default=None, repr=False, compare=False)


def accumulate(state: EfficiencyState, frames: list[Pose], dt: float,
               beta: float = 0.05) -> EfficiencyState:
    """Advance elapsed time and add this tick's frame motion.

    The frame list must keep a stable order across ticks; the first call
    only records the baseline.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    motion = 0.0
    if state.last_frames is not None:
        if len(state.last_frames) != len(frames):
            raise ValueError("frame list length changed between ticks")
        for prev, cur in zip(state.last_frames, frames):
            if cur is prev:
                continue
            d = cur.translation - prev.translation
            dp = math.sqrt(float(d @ d))
            # rotation angle from tr(Rc Rp^T) = elementwise sum of Rc * Rp
            c = 0.5 * (float(np.sum(cur.rotation * prev.rotation)) - 1.0)
            dangle = math.acos(min(max(c, -1.0), 1.0))
            motion += dp + beta * dangle
    return EfficiencyState(state.elapsed + dt, state.motion_accum + motion,
                           tuple(frames))


def efficiency_points(value: float, budget: float, slope: float) -> float:
    """50 points within budget, then a linear deduction floored at zero."""
    if budget <= 0 or slope <= 0:
        raise ValueError("budget and slope must be positive")
    if value <= budget:
        return FULL_METRIC_POINTS
    return max(0.0, FULL_METRIC_POINTS - slope * (value - budget))


@dataclass(frozen=True)
class PenaltyLine:
    kind: PenaltyKind
    count: int
    deducted: float


class SessionStatus(str, Enum):
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass(frozen=True)
class ScoreBreakdown:
    time_points: float
    motion_points: float
    penalties: tuple[PenaltyLine, ...]
    status: SessionStatus
    total: float
    elapsed: float
    motion_accum: float


def finalize(eff: EfficiencyState, events: list[SessionEvent], thresholds,
             weights: PenaltyWeights) -> ScoreBreakdown:
    """Score a halted session: efficiency minus penalties, floored at zero.

    A session counts as Completed only when a ScenarioComplete event is
    present and no immediate-fail event occurred; anything else (timeout,
    tower detach) reports Failed with total 0.
    """
    time_points = efficiency_points(eff.elapsed, thresholds.time_budget,
                                    thresholds.time_slope)
    motion_points = efficiency_points(eff.motion_accum, thresholds.motion_budget,
                                      thresholds.motion_slope)
    kinds = [e.kind for e in events]
    counts = {pk: sum(1 for k in kinds if k.value == pk.value) for pk in PenaltyKind}
    penalties = tuple(PenaltyLine(pk, n, weights.points.get(pk, 0.0) * n)
                      for pk, n in counts.items() if n > 0)
    failed = (any(k in weights.immediate_fail for k in kinds)
              or EventKind.SCENARIO_COMPLETE not in kinds)
    if failed:
        return ScoreBreakdown(time_points, motion_points, penalties,
                              SessionStatus.FAILED, 0.0,
                              eff.elapsed, eff.motion_accum)
    total = max(0.0, time_points + motion_points - sum(p.deducted for p in penalties))
    return ScoreBreakdown(time_points, motion_points, penalties,
                          SessionStatus.COMPLETED, total,
                          eff.elapsed, eff.motion_accum)


def report_dict(breakdown: ScoreBreakdown, scenario_id: str, tick_count: int,
                tick_seconds: float) -> dict:
    """Report payload with a fixed key order (sim-time only, never wall-clock)."""
    return {
        "format": "teletwin-report",
        "version": 1,
        "scenario_id": scenario_id,
        "status": breakdown.status.value,
        "start_tick": 0,
        "end_tick": tick_count,
        "duration_s": round(breakdown.elapsed, 6),
        "efficiency": {
            "total_time": {
                "value_s": round(breakdown.elapsed, 6),
                "points": round(breakdown.time_points, 6),
            },
            "economy_of_motion": {
                "value_m": round(breakdown.motion_accum, 6),
                "points": round(breakdown.motion_points, 6),
            },
        },
        "penalties": [
            {"kind": p.kind.value, "count": p.count, "deducted": round(p.deducted, 6)}
            for p in sorted(breakdown.penalties, key=lambda p: p.kind.value)
        ],
        "total": round(breakdown.total, 6),
        "tick_seconds": round(tick_seconds, 6),
    }


def export_report(breakdown: ScoreBreakdown, scenario_id: str, tick_count: int,
                  tick_seconds: float) -> str:
    """Canonical serialization: identical breakdowns give byte-identical text."""
    doc = report_dict(breakdown, scenario_id, tick_count, tick_seconds)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
