import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from teletwin.events import EventKind, SessionEvent
from teletwin.kinematics import Pose, rotation_about_axis
from teletwin.scenario import Thresholds
from teletwin.scoring import (
    EfficiencyState,
    PenaltyKind,
    PenaltyWeights,
    SessionStatus,
    accumulate,
    efficiency_points,
    export_report,
    finalize,
)

THRESHOLDS = Thresholds(time_budget=120.0, motion_budget=3.0, force_limit=8.0)


def completed(events=()):
    return [*events, SessionEvent(100, EventKind.SCENARIO_COMPLETE, "s")]


class TestAccumulate:
    def test_stationary_frames(self):
        frames = [Pose.from_translation((0.1 * i, 0, 0)) for i in range(3)]
        state = accumulate(EfficiencyState(), frames, 0.01)
        state = accumulate(state, frames, 0.01)
        assert state.motion_accum == 0.0
        assert state.elapsed == pytest.approx(0.02)

    def test_translation_only(self):
        a = [Pose.from_translation((0, 0, 0))]
        b = [Pose.from_translation((0.02, 0, 0))]
        state = accumulate(accumulate(EfficiencyState(), a, 0.01), b, 0.01)
        assert state.motion_accum == pytest.approx(0.02)

    def test_rotation_only_with_beta(self):
        a = [Pose.identity()]
        b = [Pose(rotation_about_axis(np.array([0.0, 0.0, 1.0]), 0.1), np.zeros(3))]
        state = accumulate(accumulate(EfficiencyState(), a, 0.01), b, 0.01, beta=0.05)
        assert state.motion_accum == pytest.approx(0.005)

    def test_monotonic(self):
        rng = np.random.default_rng(1)
        state = EfficiencyState()
        prev = (0.0, 0.0)
        for _ in range(30):
            frames = [Pose(rotation_about_axis(np.array([0, 0, 1.0]),
                                               float(rng.uniform(-1, 1))),
                           rng.normal(size=3))]
            state = accumulate(state, frames, 0.01)
            assert state.elapsed >= prev[0] and state.motion_accum >= prev[1]
            prev = (state.elapsed, state.motion_accum)

    def test_frame_count_change_rejected(self):
        state = accumulate(EfficiencyState(), [Pose.identity()], 0.01)
        with pytest.raises(ValueError):
            accumulate(state, [Pose.identity(), Pose.identity()], 0.01)


class TestEfficiencyPoints:
    def test_at_budget_keeps_50(self):
        assert efficiency_points(120.0, 120.0, 0.5) == 50.0

    def test_linear_deduction(self):
        assert efficiency_points(120.0 + 10 / 0.5, 120.0, 0.5) == pytest.approx(40.0)

    def test_floor_at_zero(self):
        assert efficiency_points(1e9, 120.0, 0.5) == 0.0

    @given(st.floats(0.0, 1e4), st.floats(0.0, 1e4))
    def test_monotone_in_value(self, a, b):
        lo, hi = sorted((a, b))
        assert efficiency_points(hi, 100.0, 0.5) <= efficiency_points(lo, 100.0, 0.5)


class TestFinalize:
    def test_perfect_run_scores_100(self):
        eff = EfficiencyState(elapsed=60.0, motion_accum=1.5)
        out = finalize(eff, completed(), THRESHOLDS, PenaltyWeights())
        assert out.status is SessionStatus.COMPLETED
        assert out.total == 100.0

    def test_two_drops_cost_20(self):
        eff = EfficiencyState(elapsed=60.0, motion_accum=1.5)
        events = completed([SessionEvent(5, EventKind.DROP, "ring"),
                            SessionEvent(9, EventKind.DROP, "ring")])
        out = finalize(eff, events, THRESHOLDS, PenaltyWeights())
        assert out.total == 80.0

    def test_tower_detach_zeroes(self):
        eff = EfficiencyState(elapsed=10.0, motion_accum=0.5)
        events = [SessionEvent(3, EventKind.TOWER_DETACH, "ring"),
                  SessionEvent(3, EventKind.SCENARIO_FAILED, "s")]
        out = finalize(eff, events, THRESHOLDS, PenaltyWeights())
        assert out.status is SessionStatus.FAILED
        assert out.total == 0.0

    def test_incomplete_session_fails(self):
        out = finalize(EfficiencyState(elapsed=10.0), [], THRESHOLDS, PenaltyWeights())
        assert out.status is SessionStatus.FAILED and out.total == 0.0

    def test_total_floored_at_zero(self):
        eff = EfficiencyState(elapsed=60.0, motion_accum=1.0)
        events = completed([SessionEvent(i, EventKind.GLASS_BREAK, "g")
                            for i in range(20)])
        out = finalize(eff, events, THRESHOLDS, PenaltyWeights())
        assert out.total == 0.0

    def test_matches_brute_force_recomputation(self):
        rng = np.random.default_rng(42)
        weights = PenaltyWeights()
        for _ in range(50):
            eff = EfficiencyState(elapsed=float(rng.uniform(10, 300)),
                                  motion_accum=float(rng.uniform(0.1, 10)))
            events = []
            for kind, n in ((EventKind.DROP, rng.integers(0, 3)),
                            (EventKind.EXCESSIVE_FORCE, rng.integers(0, 4)),
                            (EventKind.GLASS_BREAK, rng.integers(0, 3))):
                events += [SessionEvent(int(i), kind, "x") for i in range(n)]
            if rng.uniform() < 0.8:
                events.append(SessionEvent(999, EventKind.SCENARIO_COMPLETE, "s"))
            if rng.uniform() < 0.15:
                events.append(SessionEvent(5, EventKind.TOWER_DETACH, "x"))
            out = finalize(eff, events, THRESHOLDS, weights)

            # independent recomputation, straight from the definition
            kinds = [e.kind.value for e in events]
            t_pts = 50.0 if eff.elapsed <= 120 else max(0.0, 50 - 0.5 * (eff.elapsed - 120))
            m_pts = 50.0 if eff.motion_accum <= 3 else max(0.0, 50 - 20 * (eff.motion_accum - 3))
            ded = (10.0 * kinds.count("drop") + 5.0 * kinds.count("excessive_force")
                   + 15.0 * kinds.count("glass_break") + 2.0 * kinds.count("out_of_view"))
            if "tower_detach" in kinds or "scenario_complete" not in kinds:
                expect = 0.0
            else:
                expect = max(0.0, t_pts + m_pts - ded)
            assert out.total == pytest.approx(expect, abs=1e-12)

    def test_penalty_monotonicity(self):
        eff = EfficiencyState(elapsed=60.0, motion_accum=1.0)
        base = finalize(eff, completed(), THRESHOLDS, PenaltyWeights()).total
        for kind in (EventKind.DROP, EventKind.EXCESSIVE_FORCE, EventKind.GLASS_BREAK):
            total = finalize(eff, completed([SessionEvent(1, kind, "x")]),
                             THRESHOLDS, PenaltyWeights()).total
            assert total < base

    def test_drop_outweighs_excessive_force(self):
        eff = EfficiencyState(elapsed=60.0, motion_accum=1.0)
        drop = finalize(eff, completed([SessionEvent(1, EventKind.DROP, "x")]),
                        THRESHOLDS, PenaltyWeights()).total
        force = finalize(eff, completed([SessionEvent(1, EventKind.EXCESSIVE_FORCE, "x")]),
                         THRESHOLDS, PenaltyWeights()).total
        assert drop < force

    def test_weights_validation(self):
        with pytest.raises(ValueError):
            PenaltyWeights({PenaltyKind.DROP: 5.0, PenaltyKind.EXCESSIVE_FORCE: 5.0,
                            PenaltyKind.GLASS_BREAK: 15.0, PenaltyKind.OUT_OF_VIEW: 2.0})
        with pytest.raises(ValueError):
            PenaltyWeights({PenaltyKind.DROP: 10.0, PenaltyKind.EXCESSIVE_FORCE: -1.0,
                            PenaltyKind.GLASS_BREAK: 15.0, PenaltyKind.OUT_OF_VIEW: 2.0})


class TestReport:
    def test_perfect_report_fields(self):
        eff = EfficiencyState(elapsed=60.0, motion_accum=1.5)
        out = finalize(eff, completed(), THRESHOLDS, PenaltyWeights())
        text = export_report(out, "mini", 6000, 0.01)
        import json
        doc = json.loads(text)
        assert doc["total"] == 100.0
        assert doc["penalties"] == []
        assert doc["status"] == "completed"

    def test_failed_report(self):
        out = finalize(EfficiencyState(elapsed=5.0), [], THRESHOLDS, PenaltyWeights())
        import json
        doc = json.loads(export_report(out, "mini", 500, 0.01))
        assert doc["status"] == "failed" and doc["total"] == 0.0

    def test_byte_identical_serialization(self):
        eff = EfficiencyState(elapsed=133.7, motion_accum=3.21)
        events = completed([SessionEvent(4, EventKind.DROP, "ring"),
                            SessionEvent(8, EventKind.EXCESSIVE_FORCE, "ring")])
        out1 = finalize(eff, events, THRESHOLDS, PenaltyWeights())
        out2 = finalize(eff, events, THRESHOLDS, PenaltyWeights())
        a = export_report(out1, "mini", 13370, 0.01)
        b = export_report(out2, "mini", 13370, 0.01)
        assert a.encode() == b.encode()
