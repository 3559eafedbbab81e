"""Fixed-step session engine: input logs, the tick pipeline and offline replay.

The pipeline order per tick is fixed: pedal detection, per-arm teleop,
IK (seeded at the current joints), drive smoothing, forward kinematics,
scenario events, efficiency accumulation, snapshot. Identical inputs give
byte-identical snapshot and event streams; nothing here reads a clock.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import EngineConfig, pose_to_dict
from .events import EventKind, SessionEvent, sort_events
from .footboard import (
    FootSample,
    MinimapModel,
    PedalId,
    PedalState,
    Side,
    detect_pedals,
    minimap,
)
from .kinematics import (
    IkStatus,
    Pose,
    forward_kinematics,
    joint_frames,
    pose_error,
    quat_to_rotation,
    smooth_joint_step,
    solve_ik,
)
from .scenario import ArmObservation, ScenarioDefinition, ScenarioSession
from .scoring import (
    EfficiencyState,
    PenaltyKind,
    ScoreBreakdown,
    accumulate,
    efficiency_points,
    export_report,
    finalize,
)
from .teleop import ArmMode, ArmTeleopState, CameraState, anchor, step_teleop, toggle_thirty_degree

LOG_FORMAT = "teletwin-log"
LOG_VERSION = 1
SIDES = ("left", "right")


class LogError(ValueError):
    """Raised on malformed input logs; the message names the line number."""


@dataclass(frozen=True)
class MasterSample:
    position: np.ndarray   # (3,) meters
    quat: np.ndarray       # (4,) unit quaternion, w first
    grip: float            # 0 open .. 1 closed
    valid: bool = True

    def __post_init__(self):
        if self.valid and abs(float(np.linalg.norm(self.quat)) - 1.0) > 1e-6:
            raise ValueError("master orientation quaternion must have unit norm")
        if not 0.0 <= self.grip <= 1.0:
            raise ValueError("grip must be in [0, 1]")

    def pose(self) -> Pose:
        cached = self.__dict__.get("_pose")
        if cached is None:
            cached = Pose(quat_to_rotation(self.quat), self.position)
            object.__setattr__(self, "_pose", cached)
        return cached


@dataclass(frozen=True)
class InputFrame:
    t_ms: int
    left: MasterSample
    right: MasterSample
    feet: tuple[FootSample, FootSample]

    def master(self, side: str) -> MasterSample:
        return self.left if side == "left" else self.right


def frame_to_dict(frame: InputFrame) -> dict:
    def master(m: MasterSample) -> dict:
        return {"pos": [round(float(x), 9) for x in m.position],
                "quat": [round(float(x), 12) for x in m.quat],
                "grip": round(float(m.grip), 6),
                "valid": m.valid}

    def foot(f: FootSample) -> dict:
        return {"side": f.side.value,
                "pos": [round(float(x), 9) for x in f.planar_position],
                "height": round(float(f.height), 9),
                "valid": f.tracking_valid}

    return {"t": frame.t_ms,
            "left": master(frame.left), "right": master(frame.right),
            "feet": [foot(f) for f in frame.feet]}


def frame_from_dict(doc: dict) -> InputFrame:
    def master(d: dict) -> MasterSample:
        return MasterSample(np.asarray(d["pos"], dtype=float),
                            np.asarray(d["quat"], dtype=float),
                            float(d["grip"]), bool(d.get("valid", True)))

    def foot(d: dict) -> FootSample:
        return FootSample(Side(d["side"]), np.asarray(d["pos"], dtype=float),
                          float(d["height"]), bool(d.get("valid", True)))

    feet = tuple(foot(f) for f in doc["feet"])
    if len(feet) != 2:
        raise ValueError("frame must carry exactly two foot samples")
    return InputFrame(int(doc["t"]), master(doc["left"]), master(doc["right"]), feet)


def write_log(frames: list[InputFrame]) -> str:
    lines = [json.dumps({"format": LOG_FORMAT, "version": LOG_VERSION},
                        sort_keys=False)]
    lines += [json.dumps(frame_to_dict(f), sort_keys=False) for f in frames]
    return "\n".join(lines) + "\n"


def read_log(text: str) -> list[InputFrame]:
    """Parse a JSONL input log; errors name the offending line number."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        return []
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise LogError(f"line 1: bad header: {exc}") from None
    if header.get("format") != LOG_FORMAT:
        raise LogError(f"line 1: not a {LOG_FORMAT} header")
    if int(header.get("version", 0)) != LOG_VERSION:
        raise LogError(f"line 1: unsupported log version {header.get('version')}")
    frames: list[InputFrame] = []
    last_t = None
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            frame = frame_from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise LogError(f"line {number}: {exc}") from None
        if last_t is not None and frame.t_ms <= last_t:
            raise LogError(f"line {number}: timestamps must be strictly increasing")
        last_t = frame.t_ms
        frames.append(frame)
    return frames


# --- session state ----------------------------------------------------------

@dataclass
class ArmRuntime:
    theta: np.ndarray
    teleop: ArmTeleopState | None = None   # anchored on the first tick
    master: Pose | None = None             # last valid master pose (sample-and-hold)
    grip_input: float = 0.0
    ee_world: Pose | None = None
    target_world: Pose | None = None
    frames_world: list[Pose] = field(default_factory=list)
    residual: np.ndarray = field(default_factory=lambda: np.zeros(6))
    settled: bool = False                  # drive reached the IK solution
    base_inv: Pose | None = None           # cached inverse of the arm base pose
    last_master: Pose | None = None        # master object seen by the last teleop step


@dataclass
class SessionState:
    definition: ScenarioDefinition
    arms: dict[str, ArmRuntime]
    camera: CameraState
    pedals: PedalState
    scenario: ScenarioSession
    efficiency: EfficiencyState = field(default_factory=EfficiencyState)
    events: list[SessionEvent] = field(default_factory=list)
    tick_index: int = 0
    halted: bool = False

    @staticmethod
    def create(definition: ScenarioDefinition, cfg: EngineConfig) -> "SessionState":
        arms = {side: ArmRuntime(theta=cfg.chain(side).home.copy(),
                                 base_inv=cfg.base(side).inverse())
                for side in SIDES}
        scenario = ScenarioSession(definition,
                                   grip_close_threshold=cfg.teleop.grip_close_threshold,
                                   stiffness=cfg.stiffness)
        return SessionState(definition, arms, CameraState(cfg.camera_pose),
                            PedalState.empty(), scenario)


@dataclass(frozen=True)
class StateSnapshot:
    tick: int
    t_ms: int
    arms: dict
    camera: dict
    pedals: dict
    minimap: MinimapModel
    objects: dict
    progress: dict
    score_preview: dict
    tracking_warning: bool

    def to_dict(self) -> dict:
        mm = self.minimap
        return {
            "tick": self.tick,
            "t_ms": self.t_ms,
            "arms": self.arms,
            "camera": self.camera,
            "pedals": self.pedals,
            "minimap": {
                "pedals": [{"id": i.pedal.value,
                            "min": [round(float(x), 9) for x in i.min_corner],
                            "max": [round(float(x), 9) for x in i.max_corner],
                            "black": i.black} for i in mm.pedal_icons],
                "feet": [{"side": f.side.value,
                          "pos": [round(float(x), 9) for x in f.position],
                          "scale": round(float(f.scale), 9),
                          "visible": f.visible} for f in mm.foot_icons],
                "click": mm.click_event,
            },
            "objects": self.objects,
            "progress": self.progress,
            "score_preview": self.score_preview,
            "tracking_warning": self.tracking_warning,
        }


def _score_preview(state: SessionState, cfg: EngineConfig) -> dict:
    thr = state.definition.thresholds
    weights = state.definition.weights
    time_points = efficiency_points(state.efficiency.elapsed, thr.time_budget,
                                    thr.time_slope)
    motion_points = efficiency_points(state.efficiency.motion_accum,
                                      thr.motion_budget, thr.motion_slope)
    kinds = [e.kind for e in state.events]
    deducted = sum(weights.points.get(pk, 0.0) * sum(1 for k in kinds if k.value == pk.value)
                   for pk in PenaltyKind)
    failed = state.scenario.failed or any(k in weights.immediate_fail for k in kinds)
    total = 0.0 if failed else max(0.0, time_points + motion_points - deducted)
    return {
        "time_points": round(time_points, 6),
        "motion_points": round(motion_points, 6),
        "deducted": round(deducted, 6),
        "total": round(total, 6),
        "failed": failed,
    }


def tick(state: SessionState, frame: InputFrame, cfg: EngineConfig,
         make_snapshot: bool = True,
         ) -> tuple[SessionState, list[SessionEvent], StateSnapshot | None]:
    """Advance one fixed step. Mutates and returns the session state.

    make_snapshot=False skips building the snapshot document (offline replay
    has no consumer for it); the simulation itself is unaffected.
    """
    now = state.tick_index
    events: list[SessionEvent] = []

    pedals = detect_pedals(list(frame.feet), cfg.pedal_layout, state.pedals)
    state.pedals = pedals
    state.camera = toggle_thirty_degree(state.camera,
                                        pedals.edge(PedalId.THIRTY_DEGREE))

    for side in SIDES:
        arm = state.arms[side]
        sample = frame.master(side)
        if sample.valid:
            arm.master = sample.pose()
            arm.grip_input = sample.grip
        if arm.master is None:
            # no valid master seen yet: hold home, skip teleop for this arm
            continue
        if arm.teleop is None:
            ee0 = cfg.base(side).compose(
                forward_kinematics(cfg.chain(side), arm.theta))
            arm.teleop = ArmTeleopState(anchor(arm.master, ee0),
                                        ArmMode.FOLLOWING, ee0, arm.grip_input)
        # plain Following with the identical held master is a fixed point of
        # step_teleop; skip the (pure) recomputation
        unchanged = (arm.master is arm.last_master
                     and arm.teleop.mode is ArmMode.FOLLOWING
                     and arm.grip_input == arm.teleop.grip_command
                     and not pedals.is_pressed(PedalId.CLUTCH)
                     and not pedals.is_pressed(PedalId.CAMERA))
        if not unchanged:
            arm.teleop, state.camera = step_teleop(
                arm.teleop, state.camera, arm.master, arm.grip_input, pedals,
                cfg.teleop, drives_camera=(side == "right"))
        arm.last_master = arm.master

    for side in SIDES:
        arm = state.arms[side]
        chain = cfg.chain(side)
        base = cfg.base(side)
        if arm.teleop is not None:
            new_target = arm.teleop.ee_target
            # settled arms with a bit-identical target re-solve to the same
            # joints; skip the (pure) IK and FK work and reuse last results
            unchanged = (arm.settled and arm.target_world is not None
                         and np.array_equal(new_target.translation,
                                            arm.target_world.translation)
                         and np.array_equal(new_target.rotation,
                                            arm.target_world.rotation))
            if unchanged:
                continue
            arm.target_world = new_target
            target_chain = arm.base_inv.compose(new_target)
            result = solve_ik(chain, target_chain, arm.theta, cfg.ik,
                              collect_frames=True)
            frames_chain = None
            if result.status is IkStatus.DIVERGED:
                events.append(SessionEvent(now, EventKind.IK_WARNING, side))
                arm.settled = False
            else:
                moved = smooth_joint_step(arm.theta, result.theta,
                                          cfg.tick_seconds, cfg.rate_limit)
                arm.settled = (result.status is IkStatus.CONVERGED
                               and bool(np.array_equal(moved, result.theta)))
                if arm.settled:
                    frames_chain = result.frames  # frames at exactly this theta
                arm.theta = moved
        elif arm.ee_world is not None:
            continue  # no master yet and frames already computed
        else:
            frames_chain = None
        if frames_chain is None:
            frames_chain = joint_frames(chain, arm.theta)
        arm.frames_world = [base.compose(f) for f in frames_chain]
        arm.ee_world = arm.frames_world[-1]
        if arm.target_world is None:
            arm.target_world = arm.ee_world
        arm.residual = pose_error(arm.target_world, arm.ee_world)

    if not state.scenario.halted:
        observations = {
            side: ArmObservation(
                state.arms[side].ee_world,
                state.arms[side].teleop.grip_command if state.arms[side].teleop else 0.0,
                state.arms[side].residual)
            for side in SIDES}
        events += state.scenario.step(observations, state.camera.pose,
                                      cfg.tick_seconds, now)

    all_frames = state.arms["left"].frames_world + state.arms["right"].frames_world
    state.efficiency = accumulate(state.efficiency, all_frames,
                                  cfg.tick_seconds, cfg.beta)

    events = sort_events(events)
    state.events.extend(events)
    state.halted = state.scenario.halted

    if not make_snapshot:
        state.tick_index += 1
        return state, events, None

    arms_doc = {}
    for side in SIDES:
        arm = state.arms[side]
        arms_doc[side] = {
            "theta": [round(float(a), 9) for a in arm.theta],
            "frames": [[round(float(x), 9) for x in f.translation]
                       for f in arm.frames_world],
            "ee": pose_to_dict(arm.ee_world),
            "target": pose_to_dict(arm.target_world),
            "grip": round(float(arm.teleop.grip_command), 6) if arm.teleop else 0.0,
            "mode": arm.teleop.mode.value if arm.teleop else ArmMode.FOLLOWING.value,
        }
    snapshot = StateSnapshot(
        tick=now,
        t_ms=frame.t_ms,
        arms=arms_doc,
        camera={"pose": pose_to_dict(state.camera.pose),
                "thirty_degree": state.camera.thirty_degree_mode},
        pedals={p.value: pedals.is_pressed(p) for p in cfg.pedal_layout.pedals()},
        minimap=minimap(list(frame.feet), cfg.pedal_layout, pedals, cfg.minimap_gain),
        objects={oid: [round(float(x), 9) for x in pos]
                 for oid, pos in state.scenario.positions.items()},
        progress=state.scenario.progress(),
        score_preview=_score_preview(state, cfg),
        tracking_warning=pedals.tracking_warning,
    )
    state.tick_index += 1
    return state, events, snapshot


def finalize_session(state: SessionState, cfg: EngineConfig) -> tuple[ScoreBreakdown, str]:
    """Close the books on a halted (or abandoned) session and render the report."""
    breakdown = finalize(state.efficiency, state.events,
                         state.definition.thresholds, state.definition.weights)
    report = export_report(breakdown, state.definition.id, state.tick_index,
                           cfg.tick_seconds)
    return breakdown, report


def run_replay(definition: ScenarioDefinition, frames: list[InputFrame],
               cfg: EngineConfig) -> tuple[str, SessionState]:
    """Drive the engine over a whole recorded log with sample-and-hold inputs.

    Ticks run at the fixed step from the first frame's timestamp through the
    last, stopping early when the scenario halts. Returns the canonical
    report text and the final state.
    """
    state = SessionState.create(definition, cfg)
    if not frames:
        _, report = finalize_session(state, cfg)
        return report, state
    tick_ms = cfg.tick_seconds * 1000.0
    index = 0
    k = int(np.ceil(frames[0].t_ms / tick_ms))
    while not state.halted:
        t = k * tick_ms
        if t > frames[-1].t_ms:
            break
        while index + 1 < len(frames) and frames[index + 1].t_ms <= t:
            index += 1
        state, _, _ = tick(state, frames[index], cfg, make_snapshot=False)
        k += 1
    _, report = finalize_session(state, cfg)
    return report, state
