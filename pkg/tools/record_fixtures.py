#!/usr/bin/env python3
"""Author the frozen fixture logs under tests/fixtures/.

Each fixture is a scripted master trajectory expressed through the same
anchor/scale mapping the engine applies, then verified by replaying it
through the engine before freezing. Regenerate with:

    python3 tools/record_fixtures.py
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from teletwin.config import EngineConfig
from teletwin.footboard import FootSample, PedalId, Side
from teletwin.kinematics import (
    forward_kinematics,
    rotation_to_quat,
    rotation_to_rotvec,
    rotvec_to_rotation,
)
from teletwin.scenario import load_bundled
from teletwin.session import InputFrame, MasterSample, run_replay, write_log

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
FOOT_PARK = {"left": np.array([-0.2, -0.35]), "right": np.array([0.2, -0.35])}


def _aim_rotation(eye: np.ndarray, look: np.ndarray) -> np.ndarray:
    """Rotation whose +z column points from eye to look (same recipe as config)."""
    d = look - eye
    d = d / np.linalg.norm(d)
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(z, d)
    n = float(np.linalg.norm(axis))
    if n < 1e-12:
        return np.eye(3)
    from teletwin.kinematics import rotation_about_axis
    return rotation_about_axis(axis / n, float(math.acos(np.clip(np.dot(z, d), -1, 1))))


class Script:
    """Builds input frames by driving the engine's teleop mapping inversely."""

    def __init__(self, cfg: EngineConfig, frame_ms: int = 20):
        self.cfg = cfg
        self.frame_ms = frame_ms
        self.t = 0
        self.frames: list[InputFrame] = []
        self.alpha = cfg.teleop.motion_scale
        self.pos = {s: np.zeros(3) for s in ("left", "right")}
        self.rot = {s: np.eye(3) for s in ("left", "right")}
        self.grip = {s: 0.0 for s in ("left", "right")}
        self.foot_pos = {s: FOOT_PARK[s].copy() for s in ("left", "right")}
        self.anchor_m = {s: np.zeros(3) for s in ("left", "right")}
        self.anchor_ee = {}
        for s in ("left", "right"):
            home = cfg.base(s).compose(forward_kinematics(cfg.chain(s), cfg.chain(s).home))
            self.anchor_ee[s] = home.translation.copy()
        self.cam_pos = cfg.camera_pose.translation.copy()
        self.cam_rot = cfg.camera_pose.rotation.copy()
        self._cam_anchor = None
        self.emit()  # the t=0 frame anchors the session

    # -- raw frame plumbing -------------------------------------------------
    def emit(self, n: int = 1):
        for _ in range(n):
            masters = {}
            for s in ("left", "right"):
                masters[s] = MasterSample(self.pos[s].copy(),
                                          rotation_to_quat(self.rot[s]),
                                          self.grip[s])
            feet = (FootSample(Side.LEFT, self.foot_pos["left"].copy(), 0.0),
                    FootSample(Side.RIGHT, self.foot_pos["right"].copy(), 0.0))
            self.frames.append(InputFrame(self.t, masters["left"], masters["right"], feet))
            self.t += self.frame_ms

    def hold(self, seconds: float):
        self.emit(max(1, round(seconds * 1000 / self.frame_ms)))

    # -- tip-space motion ----------------------------------------------------
    def tip(self, side: str) -> np.ndarray:
        return self.anchor_ee[side] + self.alpha * (self.pos[side] - self.anchor_m[side])

    def move_tip(self, side: str, target, speed: float):
        target = np.asarray(target, dtype=float)
        start = self.tip(side)
        dist = float(np.linalg.norm(target - start))
        steps = max(1, math.ceil(dist / speed / (self.frame_ms / 1000.0)))
        for i in range(1, steps + 1):
            tip_i = start + (target - start) * (i / steps)
            self.pos[side] = self.anchor_m[side] + (tip_i - self.anchor_ee[side]) / self.alpha
            self.emit()

    def ramp_grip(self, side: str, value: float, seconds: float = 0.1):
        start = self.grip[side]
        steps = max(1, round(seconds * 1000 / self.frame_ms))
        for i in range(1, steps + 1):
            self.grip[side] = start + (value - start) * (i / steps)
            self.emit()

    # -- pedals ---------------------------------------------------------------
    def _pedal_center(self, pedal: PedalId) -> np.ndarray:
        region = next(r for r in self.cfg.pedal_layout.regions if r.pedal == pedal)
        return (region.min_corner + region.max_corner) / 2.0

    def press_pedal(self, pedal: PedalId, foot: str = "left"):
        self.foot_pos[foot] = self._pedal_center(pedal).copy()
        self.emit()

    def release_pedal(self, foot: str = "left"):
        self.foot_pos[foot] = FOOT_PARK[foot].copy()
        self.emit()

    # -- clutch indexing -------------------------------------------------------
    def clutch_recenter(self, side: str, new_master_pos=(0.0, 0.0, 0.0)):
        frozen = self.tip(side)
        self.press_pedal(PedalId.CLUTCH)
        self.hold(0.1)
        target = np.asarray(new_master_pos, dtype=float)
        steps = max(1, math.ceil(float(np.linalg.norm(target - self.pos[side])) / 0.4
                                 / (self.frame_ms / 1000.0)))
        start = self.pos[side].copy()
        for i in range(1, steps + 1):
            self.pos[side] = start + (target - start) * (i / steps)
            self.emit()
        self.hold(0.1)
        self.release_pedal()
        # the engine re-anchors both arms on the release edge
        for s in ("left", "right"):
            self.anchor_m[s] = self.pos[s].copy()
            self.anchor_ee[s] = self.tip_frozen(s, frozen if s == side else None)
        self.hold(0.1)

    def tip_frozen(self, side: str, frozen):
        return frozen.copy() if frozen is not None else self.anchor_ee[side].copy()

    # -- camera driving ---------------------------------------------------------
    def camera_press(self):
        self._cam_anchor = (self.pos["right"].copy(), self.rot["right"].copy(),
                            self.cam_pos.copy(), self.cam_rot.copy(),
                            {s: self.tip(s) for s in ("left", "right")})
        self.press_pedal(PedalId.CAMERA)
        self.hold(0.1)

    def camera_aim(self, look_at, seconds: float = 1.5):
        """Slerp the right master so the camera boresight lands on look_at."""
        m_pos0, m_rot0, cam_pos0, cam_rot0, _ = self._cam_anchor
        want_cam = _aim_rotation(cam_pos0, np.asarray(look_at, dtype=float))
        delta_cam = want_cam @ cam_rot0.T
        scale = self.cfg.teleop.camera_rotation_scale
        delta_master = rotvec_to_rotation(rotation_to_rotvec(delta_cam) / scale)
        target_rot = delta_master @ m_rot0
        start_rot = self.rot["right"].copy()
        rel = rotation_to_rotvec(target_rot @ start_rot.T)
        steps = max(1, round(seconds * 1000 / self.frame_ms))
        for i in range(1, steps + 1):
            self.rot["right"] = rotvec_to_rotation(rel * (i / steps)) @ start_rot
            self.emit()

    def camera_release(self):
        m_pos0, m_rot0, cam_pos0, cam_rot0, frozen_tips = self._cam_anchor
        # final camera pose per the engine's scaled mapping
        delta = self.rot["right"] @ m_rot0.T
        scale = self.cfg.teleop.camera_rotation_scale
        self.cam_rot = rotvec_to_rotation(scale * rotation_to_rotvec(delta)) @ cam_rot0
        self.cam_pos = cam_pos0 + self.alpha * (self.pos["right"] - m_pos0)
        self.release_pedal()
        for s in ("left", "right"):
            self.anchor_m[s] = self.pos[s].copy()
            self.anchor_ee[s] = frozen_tips[s].copy()
        self._cam_anchor = None
        self.hold(0.1)


def verify(name: str, scenario_id: str, frames, expect_status: str,
           expect_total=None) -> dict:
    cfg = EngineConfig()
    report, state = run_replay(load_bundled(scenario_id), frames, cfg)
    doc = json.loads(report)
    ok = doc["status"] == expect_status and (expect_total is None
                                             or doc["total"] == expect_total)
    kinds = [e.kind.value for e in state.events]
    print(f"{name:42s} status={doc['status']:9s} total={doc['total']:6.1f} "
          f"t={doc['duration_s']:6.1f}s motion="
          f"{doc['efficiency']['economy_of_motion']['value_m']:6.3f}m "
          f"{'OK' if ok else 'MISMATCH'}")
    if not ok:
        print("  events:", kinds)
        raise SystemExit(f"fixture {name} failed verification")
    return doc


def save(name: str, frames):
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / name).write_text(write_log(frames))


# --- wrist articulation --------------------------------------------------------

def wrist_script(speed: float, wander: int, wall_dips: tuple[int, ...],
                 pause: float) -> list[InputFrame]:
    """Park on the rest marker, then ten ball touches through the cube opening.

    wander inserts detour waypoints between touches; wall_dips lists the
    touch indices after which the tip brushes the +x glass wall (one break
    each); pause stretches the session with idle holds.
    """
    cfg = EngineConfig()
    s = Script(cfg)
    s.hold(0.2)
    s.move_tip("right", (0.40, -0.06, 0.34), speed)   # rest marker
    s.hold(0.3)
    hover = np.array([0.42, 0.0, 0.36])
    ball = np.array([0.42, 0.0, 0.28])
    s.move_tip("right", hover, speed)
    s.hold(max(pause, 0.1))
    for touch in range(10):
        s.move_tip("right", ball, speed)
        s.hold(0.15)
        if touch in wall_dips:
            s.move_tip("right", (0.42, 0.0, 0.305), speed)   # clear of the ball
            s.move_tip("right", (0.458, 0.0, 0.305), speed)  # brush the +x wall
            s.hold(0.1)
            s.move_tip("right", (0.42, 0.0, 0.305), speed)
        s.move_tip("right", hover, speed)
        if wander and touch % 2 == 0:
            s.move_tip("right", (0.36, -0.08, 0.40), speed)
            if wander > 1:
                s.move_tip("right", (0.48, 0.06, 0.42), speed)
            s.move_tip("right", hover, speed)
        s.hold(pause if touch < 9 else 0.2)
    return s.frames


# --- clutch ---------------------------------------------------------------------

def clutch_script() -> list[InputFrame]:
    cfg = EngineConfig()
    s = Script(cfg)
    speed = 0.08
    near = np.array([0.40, -0.02, 0.30])
    far = np.array([0.52, 0.10, 0.26])
    back_near = near + np.array([-0.03, -0.03, 0.02])
    s.hold(0.2)
    for _ in range(2):
        s.move_tip("right", near, speed)
        s.hold(0.15)
        s.move_tip("right", back_near, speed)
        s.hold(0.1)
    # recenter the hand with the clutch before the long reach
    s.clutch_recenter("right", (0.0, 0.0, 0.0))
    back_far = far + np.array([-0.04, -0.02, 0.03])
    for _ in range(2):
        s.move_tip("right", far, speed)
        s.hold(0.15)
        s.move_tip("right", back_far, speed)
        s.hold(0.1)
    return s.frames


# --- camera ---------------------------------------------------------------------

def camera_script() -> list[InputFrame]:
    cfg = EngineConfig()
    s = Script(cfg)
    s.hold(0.2)
    s.camera_press()
    for marker in ((0.45, -0.10, 0.30), (0.45, 0.0, 0.35), (0.45, 0.10, 0.25)):
        s.camera_aim(marker, seconds=1.2)
        s.hold(0.3)
    s.camera_release()
    s.hold(0.2)
    return s.frames


# --- sea spikes -----------------------------------------------------------------

def sea_spikes_script() -> list[InputFrame]:
    cfg = EngineConfig()
    s = Script(cfg)
    speed = 0.06
    s.hold(0.2)
    for spike in ((0.44, -0.06, 0.27), (0.47, 0.0, 0.31), (0.44, 0.06, 0.25)):
        above = np.asarray(spike) + np.array([0.0, 0.0, 0.05])
        s.move_tip("right", above, speed)
        s.move_tip("right", spike, speed)
        s.hold(0.15)
        s.move_tip("right", above, speed)
        s.hold(0.1)
    return s.frames


# --- ring tower -----------------------------------------------------------------

def ring_script(detach: bool) -> list[InputFrame]:
    cfg = EngineConfig()
    s = Script(cfg)
    ring = np.array([0.44, -0.05, 0.28])
    s.hold(0.2)
    s.move_tip("right", ring + np.array([0.0, 0.0, 0.06]), 0.06)
    s.move_tip("right", ring, 0.03)
    s.hold(0.3)
    s.ramp_grip("right", 1.0, seconds=0.12)
    s.hold(0.2)
    if detach:
        # yank: one-frame master jump, 75 mm of commanded tip motion
        s.pos["right"] = s.pos["right"] + np.array([0.3, 0.0, 0.0])
        s.emit()
        s.hold(0.4)
        return s.frames
    s.move_tip("right", ring + np.array([0.0, 0.0, 0.05]), 0.02)  # off the wire
    s.hold(0.2)
    s.move_tip("right", (0.48, 0.05, 0.28), 0.05)
    s.move_tip("right", (0.48, 0.05, 0.26), 0.03)
    s.hold(0.3)
    s.ramp_grip("right", 0.0, seconds=0.12)
    s.hold(0.3)
    return s.frames


def main():
    jobs = [
        ("wrist_articulation_1_perfect.jsonl", "wrist_articulation_1",
         wrist_script(speed=0.08, wander=0, wall_dips=(), pause=0.1),
         "completed", 100.0),
        ("wrist_articulation_1_intermediate.jsonl", "wrist_articulation_1",
         wrist_script(speed=0.06, wander=1, wall_dips=(4,), pause=0.5),
         "completed", None),
        ("wrist_articulation_1_novice.jsonl", "wrist_articulation_1",
         wrist_script(speed=0.04, wander=2, wall_dips=(3, 7), pause=2.15),
         "completed", None),
        ("clutch_perfect.jsonl", "clutch", clutch_script(), "completed", 100.0),
        ("camera_0_perfect.jsonl", "camera_0", camera_script(), "completed", 100.0),
        ("sea_spikes_1_perfect.jsonl", "sea_spikes_1", sea_spikes_script(),
         "completed", 100.0),
        ("ring_tower_transfer_1_perfect.jsonl", "ring_tower_transfer_1",
         ring_script(detach=False), "completed", 100.0),
        ("ring_tower_transfer_1_detach.jsonl", "ring_tower_transfer_1",
         ring_script(detach=True), "failed", 0.0),
    ]
    totals = {}
    for name, scenario_id, frames, status, total in jobs:
        doc = verify(name, scenario_id, frames, status, total)
        totals[name] = doc["total"]
        save(name, frames)
    trend = [totals["wrist_articulation_1_novice.jsonl"],
             totals["wrist_articulation_1_intermediate.jsonl"],
             totals["wrist_articulation_1_perfect.jsonl"]]
    print("trend totals (novice -> perfect):", trend)
    if not (trend[0] < trend[1] < trend[2]):
        raise SystemExit("trend fixtures are not strictly increasing")
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
