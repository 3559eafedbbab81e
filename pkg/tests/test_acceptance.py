"""Acceptance suite: one test per release criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -s` to see the verdict lines.
"""
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from teletwin.config import EngineConfig
from teletwin.events import EventKind, SessionEvent
from teletwin.kinematics import (
    IkStatus,
    Pose,
    default_chain,
    forward_kinematics,
    geometric_jacobian,
    numeric_jacobian,
    rotation_about_axis,
    solve_ik,
)
from teletwin.scenario import Thresholds, load_bundled
from teletwin.scoring import EfficiencyState, PenaltyWeights, finalize
from teletwin.session import read_log, run_replay
from teletwin.teleop import (
    ArmMode,
    ArmTeleopState,
    CameraState,
    TeleopConfig,
    anchor,
    desired_orientation,
    desired_position,
    follow_target,
    step_teleop,
)
from teletwin.footboard import PedalId, PedalState

FIXTURES = Path(__file__).parent / "fixtures"
BUNDLED_FIXTURES = {
    "wrist_articulation_1": "wrist_articulation_1_perfect.jsonl",
    "clutch": "clutch_perfect.jsonl",
    "camera_0": "camera_0_perfect.jsonl",
    "sea_spikes_1": "sea_spikes_1_perfect.jsonl",
    "ring_tower_transfer_1": "ring_tower_transfer_1_perfect.jsonl",
}


def verdict(ok: bool, name: str, detail: str = ""):
    print(f"{'PASS' if ok else 'FAIL'} - {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def random_rotation(rng):
    v = rng.normal(size=3)
    return rotation_about_axis(v / np.linalg.norm(v), rng.uniform(-3.0, 3.0))


def random_pose(rng):
    return Pose(random_rotation(rng), rng.normal(size=3))


def test_ik_convergence_suite():
    chain = default_chain()
    rng = np.random.default_rng(20240612)
    lo, hi = chain.lower_limits, chain.upper_limits
    cases = []
    for _ in range(1000):
        goal = rng.uniform(lo, hi)
        cases.append((forward_kinematics(chain, goal),
                      goal + rng.uniform(-0.05, 0.05, size=6)))
    converged = 0
    start = time.perf_counter()
    for target, seed in cases:
        res = solve_ik(chain, target, seed)
        ok = (res.status is IkStatus.CONVERGED
              and res.iterations <= 50
              and np.linalg.norm(res.residual[0:3]) < 1e-6
              and np.linalg.norm(res.residual[3:6]) < 1e-6)
        converged += ok
    mean_ms = (time.perf_counter() - start) / len(cases) * 1000.0
    rate = converged / len(cases)
    verdict(rate >= 0.99 and mean_ms < 1.0, "IK convergence suite",
            f"{rate:.1%} converged, {mean_ms:.3f} ms mean solve")


def test_jacobian_cross_check():
    chain = default_chain()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        theta = rng.uniform(chain.lower_limits, chain.upper_limits)
        diff = geometric_jacobian(chain, theta) - numeric_jacobian(chain, theta, 1e-7)
        worst = max(worst, float(np.max(np.abs(diff))))
    verdict(worst < 1e-5, "Jacobian cross-check", f"max |geo - fd| = {worst:.2e}")


def test_teleop_algebra():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        a = anchor(random_pose(rng), random_pose(rng))
        # identity at the anchor
        err = np.max(np.abs(desired_orientation(a, a.master_initial.rotation)
                            - a.ee_initial.rotation))
        worst = max(worst, float(err))
        # left increment
        delta = random_rotation(rng)
        err = np.max(np.abs(desired_orientation(a, delta @ a.master_initial.rotation)
                            - delta @ a.ee_initial.rotation))
        worst = max(worst, float(err))
        # translation affinity
        alpha = float(rng.uniform(0.05, 1.0))
        d = rng.normal(size=3)
        base = desired_position(a, a.master_initial.translation, alpha)
        one = desired_position(a, a.master_initial.translation + d, alpha) - base
        two = desired_position(a, a.master_initial.translation + 2 * d, alpha) - base
        worst = max(worst, float(np.max(np.abs(two - 2 * one))))
        worst = max(worst, float(np.max(np.abs(base - a.ee_initial.translation))))
    verdict(worst < 1e-12, "Teleop algebra (orientation map + scaled translation)",
            f"max deviation {worst:.2e}")


def test_clutch_invariance():
    rng = np.random.default_rng(13)
    cfg = TeleopConfig()
    pressed = {p: False for p in PedalId}
    pressed[PedalId.CLUTCH] = True
    clutched = PedalState(pressed)
    released = PedalState({p: False for p in PedalId})
    worst_freeze = 0.0
    worst_jump = 0.0
    for _ in range(200):
        master = random_pose(rng)
        ee = random_pose(rng)
        a = anchor(master, ee)
        state = ArmTeleopState(a, ArmMode.FOLLOWING,
                               follow_target(a, master, cfg.motion_scale))
        cam = CameraState(Pose.identity())
        frozen = state.ee_target
        wander = master
        for _ in range(10):
            wander = Pose(random_rotation(rng) @ wander.rotation,
                          wander.translation + rng.normal(scale=0.05, size=3))
            state, cam = step_teleop(state, cam, wander, 0.0, clutched, cfg)
            worst_freeze = max(worst_freeze, float(np.max(np.abs(
                state.ee_target.translation - frozen.translation))))
        state, cam = step_teleop(state, cam, wander, 0.0, released, cfg)
        worst_jump = max(worst_jump, float(np.linalg.norm(
            state.ee_target.translation - frozen.translation)))
    verdict(worst_freeze == 0.0 and worst_jump < 1e-12, "Clutch invariance",
            f"freeze drift {worst_freeze:.2e}, release jump {worst_jump:.2e}")


def test_scoring_oracle():
    rng = np.random.default_rng(17)
    thresholds = Thresholds(time_budget=120.0, motion_budget=3.0, force_limit=8.0)
    weights = PenaltyWeights()
    checked = 0
    for case in range(50):
        eff = EfficiencyState(elapsed=float(rng.uniform(5, 400)),
                              motion_accum=float(rng.uniform(0.0, 12.0)))
        events = []
        tick = 0
        for kind in (EventKind.DROP, EventKind.EXCESSIVE_FORCE,
                     EventKind.GLASS_BREAK):
            for _ in range(int(rng.integers(0, 4))):
                events.append(SessionEvent(tick, kind, "x"))
                tick += 1
        if case == 0:
            eff = EfficiencyState(elapsed=50.0, motion_accum=1.0)
            events = []
        detach = case % 7 == 3
        if detach:
            events.append(SessionEvent(tick, EventKind.TOWER_DETACH, "ring"))
            events.append(SessionEvent(tick, EventKind.SCENARIO_FAILED, "s"))
        complete = case % 5 != 4 and not detach
        if complete:
            events.append(SessionEvent(tick + 1, EventKind.SCENARIO_COMPLETE, "s"))
        out = finalize(eff, events, thresholds, weights)

        # independent brute-force recomputation
        kinds = [e.kind.value for e in events]
        t_pts = 50.0 if eff.elapsed <= 120 else max(0.0, 50 - 0.5 * (eff.elapsed - 120))
        m_pts = (50.0 if eff.motion_accum <= 3
                 else max(0.0, 50 - 20 * (eff.motion_accum - 3)))
        ded = (10 * kinds.count("drop") + 5 * kinds.count("excessive_force")
               + 15 * kinds.count("glass_break") + 2 * kinds.count("out_of_view"))
        if "tower_detach" in kinds or "scenario_complete" not in kinds:
            expect = 0.0
            expect_status = "failed"
        else:
            expect = max(0.0, t_pts + m_pts - ded)
            expect_status = "completed"
        assert out.total == pytest.approx(expect, abs=1e-12)
        assert out.status.value == expect_status
        if case == 0:
            assert out.total == 100.0  # perfect run
        checked += 1
    verdict(checked == 50, "Scoring oracle (50 brute-force recomputations)",
            "incl. perfect run = 100 and tower detach -> failed/0")


def test_replay_determinism_all_bundled():
    cfg = EngineConfig()
    all_ok = True
    details = []
    for scenario_id, fixture in BUNDLED_FIXTURES.items():
        frames = read_log((FIXTURES / fixture).read_text())
        a, _ = run_replay(load_bundled(scenario_id), frames, cfg)
        b, _ = run_replay(load_bundled(scenario_id), frames, cfg)
        same = a.encode() == b.encode()
        all_ok = all_ok and same
        details.append(f"{scenario_id}:{'=' if same else '!'}")
    verdict(all_ok, "Replay determinism (5 bundled fixtures, double run)",
            " ".join(details))


def test_replay_determinism_across_processes(tmp_path):
    # independent interpreter processes stand in for independent platforms
    fixture = FIXTURES / "ring_tower_transfer_1_perfect.jsonl"
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        r = subprocess.run(
            [sys.executable, "-m", "teletwin.cli", "replay",
             "ring_tower_transfer_1", str(fixture), "--out", str(out)],
            capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
    same = outs[0].read_bytes() == outs[1].read_bytes()
    verdict(same, "Replay determinism across interpreter processes")


def test_perfect_fixtures_score_100():
    cfg = EngineConfig()
    ok = True
    details = []
    for scenario_id, fixture in BUNDLED_FIXTURES.items():
        frames = read_log((FIXTURES / fixture).read_text())
        report, _ = run_replay(load_bundled(scenario_id), frames, cfg)
        doc = json.loads(report)
        good = doc["status"] == "completed" and doc["total"] == 100.0
        ok = ok and good
        details.append(f"{scenario_id}={doc['total']}")
    verdict(ok, "Perfect-run fixtures score 100", " ".join(details))


def test_tower_detach_fixture_fails_with_zero():
    frames = read_log((FIXTURES / "ring_tower_transfer_1_detach.jsonl").read_text())
    report, state = run_replay(load_bundled("ring_tower_transfer_1"), frames,
                               EngineConfig())
    doc = json.loads(report)
    kinds = [e.kind for e in state.events]
    ok = (doc["status"] == "failed" and doc["total"] == 0.0
          and EventKind.TOWER_DETACH in kinds)
    verdict(ok, "Tower detach fails immediately with total 0",
            f"status={doc['status']} total={doc['total']}")


def test_training_trend_analog():
    cfg = EngineConfig()
    defn = load_bundled("wrist_articulation_1")
    totals = []
    motions = []
    for fixture in ("wrist_articulation_1_novice.jsonl",
                    "wrist_articulation_1_intermediate.jsonl",
                    "wrist_articulation_1_perfect.jsonl"):
        frames = read_log((FIXTURES / fixture).read_text())
        report, _ = run_replay(defn, frames, cfg)
        doc = json.loads(report)
        totals.append(doc["total"])
        motions.append(doc["efficiency"]["economy_of_motion"]["value_m"])
    increasing = totals[0] < totals[1] < totals[2]
    shrinking = motions[0] > motions[1] > motions[2]
    verdict(increasing and shrinking, "Training-trend analog",
            f"totals {totals}, path lengths {motions}")


def test_cli_replay_speed(tmp_path):
    fixture = FIXTURES / "wrist_articulation_1_novice.jsonl"
    out = tmp_path / "report.json"
    start = time.perf_counter()
    r = subprocess.run(
        [sys.executable, "-m", "teletwin.cli", "replay", "wrist_articulation_1",
         str(fixture), "--out", str(out)],
        capture_output=True, text=True)
    wall = time.perf_counter() - start
    assert r.returncode == 0, r.stderr
    doc = json.loads(out.read_text())
    long_enough = doc["duration_s"] >= 100.0  # a ~120 s simulated session
    verdict(wall < 5.0 and long_enough, "CLI replay speed",
            f"{doc['duration_s']:.1f} s simulated in {wall:.2f} s wall")
