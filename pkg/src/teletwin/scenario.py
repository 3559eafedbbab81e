"""Training scenario definitions, the JSON loader and the action/event engine.

A scenario is an ordered list of action nodes, each repeated a fixed number
of times, over a small set of desk-scale scene objects. step() turns the
end effectors' geometry into events: touches, grasps, drops, glass breaks
and the immediate-fail tower detach.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

import numpy as np

from .events import EventKind, SessionEvent, sort_events
from .kinematics import Pose
from .scoring import PenaltyKind, PenaltyWeights

DEFAULT_AIM_TOLERANCE = 0.2  # rad, CameraAim cone half-angle when no param given


class ScenarioError(ValueError):
    """Raised on malformed scenario documents; the message names the field."""


class ActionKind(str, Enum):
    PLACE = "place"
    TOUCH = "touch"
    TRANSFER = "transfer"
    CAMERA_AIM = "camera_aim"


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class Shell:
    """Open-top glass box: five wall slabs of the given thickness."""
    center: np.ndarray
    half_extents: np.ndarray
    thickness: float

    def in_wall(self, point: np.ndarray) -> bool:
        d = np.abs(point - self.center)
        if np.any(d > self.half_extents):
            return False  # outside the outer box
        inner = self.half_extents - self.thickness
        if np.all(d <= inner):
            return False  # in the hollow interior
        # inside some wall slab; the +z face is the opening
        rel_z = point[2] - self.center[2]
        over_opening = (d[0] <= inner[0] and d[1] <= inner[1] and rel_z > inner[2])
        return not over_opening


@dataclass(frozen=True)
class Ring:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class Tower:
    base: np.ndarray
    height: float
    detach_force: float

    def top_z(self) -> float:
        return float(self.base[2]) + self.height


Shape = Sphere | Shell | Ring | Tower


@dataclass(frozen=True)
class Region:
    center: np.ndarray
    radius: float

    def contains(self, point: np.ndarray) -> bool:
        return float(np.linalg.norm(point - self.center)) <= self.radius


@dataclass(frozen=True)
class SceneObject:
    id: str
    shape: Shape
    grabbable: bool = False
    grasp_radius: float | None = None
    placement_target: Region | None = None

    def __post_init__(self):
        if self.grabbable and (self.grasp_radius is None or self.grasp_radius <= 0):
            raise ScenarioError(
                f"object '{self.id}': grabbable objects need a positive grasp_radius")

    def anchor_point(self) -> np.ndarray:
        if isinstance(self.shape, Tower):
            return self.shape.base
        return self.shape.center


@dataclass(frozen=True)
class ActionNode:
    kind: ActionKind
    targets: tuple[str, ...]
    repetitions: int
    params: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ScenarioError("action repetitions must be >= 1")
        if not self.targets:
            raise ScenarioError("action needs at least one target object id")
        if self.params is not None and len(self.params) != self.repetitions:
            raise ScenarioError("params length must equal repetitions")

    def target_for(self, rep: int) -> str:
        return self.targets[rep % len(self.targets)]

    def param_for(self, rep: int) -> float | None:
        return None if self.params is None else self.params[rep]


@dataclass(frozen=True)
class Thresholds:
    time_budget: float = 120.0
    motion_budget: float = 3.0
    force_limit: float = 8.0
    time_slope: float = 0.5   # points per second over budget
    motion_slope: float = 20.0  # points per meter-equivalent over budget

    def __post_init__(self):
        for name in ("time_budget", "motion_budget", "force_limit",
                     "time_slope", "motion_slope"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"thresholds.{name} must be positive")


@dataclass(frozen=True)
class ScenarioDefinition:
    id: str
    title: str
    instructions: tuple[str, ...]
    actions: tuple[ActionNode, ...]
    objects: tuple[SceneObject, ...]
    thresholds: Thresholds
    weights: PenaltyWeights

    def __post_init__(self):
        if not self.actions:
            raise ScenarioError("scenario needs at least one action")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate object ids")
        known = set(ids)
        for action in self.actions:
            for target in action.targets:
                if target not in known:
                    raise ScenarioError(
                        f"action references unknown object '{target}'")

    def object_by_id(self, oid: str) -> SceneObject:
        return next(o for o in self.objects if o.id == oid)


# --- JSON loading ---------------------------------------------------------

def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScenarioError(f"missing required field '{key}' in {where}")
    return mapping[key]

def _reject_unknown(mapping: dict, allowed: set[str], where: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioError(f"unknown key(s) {sorted(unknown)} in {where}")

def _vec(value, n: int, where: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise ScenarioError(f"{where} must be a {n}-vector")
    return arr


def _parse_shape(doc: dict, where: str) -> Shape:
    kind = _require(doc, "kind", where)
    if kind == "sphere":
        _reject_unknown(doc, {"kind", "center", "radius"}, where)
        radius = float(_require(doc, "radius", where))
        if radius <= 0:
            raise ScenarioError(f"{where}: radius must be positive")
        return Sphere(_vec(_require(doc, "center", where), 3, where + ".center"), radius)
    if kind == "shell":
        _reject_unknown(doc, {"kind", "center", "half_extents", "thickness"}, where)
        half = _vec(_require(doc, "half_extents", where), 3, where + ".half_extents")
        thickness = float(_require(doc, "thickness", where))
        if np.any(half <= 0) or thickness <= 0 or thickness >= float(np.min(half)):
            raise ScenarioError(f"{where}: shell geometry must be positive with "
                                "thickness below the half extents")
        return Shell(_vec(_require(doc, "center", where), 3, where + ".center"),
                     half, thickness)
    if kind == "ring":
        _reject_unknown(doc, {"kind", "center", "radius"}, where)
        radius = float(_require(doc, "radius", where))
        if radius <= 0:
            raise ScenarioError(f"{where}: radius must be positive")
        return Ring(_vec(_require(doc, "center", where), 3, where + ".center"), radius)
    if kind == "tower":
        _reject_unknown(doc, {"kind", "base", "height", "detach_force"}, where)
        height = float(_require(doc, "height", where))
        detach = float(_require(doc, "detach_force", where))
        if height <= 0 or detach <= 0:
            raise ScenarioError(f"{where}: tower height and detach_force must be positive")
        return Tower(_vec(_require(doc, "base", where), 3, where + ".base"),
                     height, detach)
    raise ScenarioError(f"unknown shape kind '{kind}' in {where}")


def _parse_object(doc: dict, index: int) -> SceneObject:
    where = f"objects[{index}]"
    _reject_unknown(doc, {"id", "shape", "grabbable", "grasp_radius",
                          "placement_target"}, where)
    oid = str(_require(doc, "id", where))
    shape = _parse_shape(_require(doc, "shape", where), f"{where}.shape")
    target = None
    if doc.get("placement_target") is not None:
        tdoc = doc["placement_target"]
        _reject_unknown(tdoc, {"center", "radius"}, f"{where}.placement_target")
        radius = float(_require(tdoc, "radius", f"{where}.placement_target"))
        if radius <= 0:
            raise ScenarioError(f"{where}.placement_target: radius must be positive")
        target = Region(_vec(_require(tdoc, "center", f"{where}.placement_target"),
                             3, f"{where}.placement_target.center"), radius)
    grasp = doc.get("grasp_radius")
    return SceneObject(oid, shape, bool(doc.get("grabbable", False)),
                       None if grasp is None else float(grasp), target)


def _parse_action(doc: dict, index: int) -> ActionNode:
    where = f"actions[{index}]"
    _reject_unknown(doc, {"kind", "targets", "repetitions", "params"}, where)
    kind_raw = str(_require(doc, "kind", where))
    try:
        kind = ActionKind(kind_raw)
    except ValueError:
        raise ScenarioError(f"unknown action kind '{kind_raw}' in {where}") from None
    targets = tuple(str(t) for t in _require(doc, "targets", where))
    reps = int(_require(doc, "repetitions", where))
    params = doc.get("params")
    return ActionNode(kind, targets, reps,
                      None if params is None else tuple(float(p) for p in params))


def _parse_weights(doc: dict) -> PenaltyWeights:
    _reject_unknown(doc, {pk.value for pk in PenaltyKind} | {"immediate_fail"},
                    "weights")
    defaults = PenaltyWeights()
    points = dict(defaults.points)
    for pk in PenaltyKind:
        if pk.value in doc:
            points[pk] = float(doc[pk.value])
    fail = defaults.immediate_fail
    if "immediate_fail" in doc:
        kinds = []
        for name in doc["immediate_fail"]:
            try:
                kinds.append(EventKind(str(name)))
            except ValueError:
                raise ScenarioError(
                    f"unknown event kind '{name}' in weights.immediate_fail") from None
        fail = frozenset(kinds)
    try:
        return PenaltyWeights(points, fail)
    except ValueError as exc:
        raise ScenarioError(f"weights: {exc}") from None


def load_scenario(document: str) -> ScenarioDefinition:
    """Parse and validate a scenario JSON document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    _reject_unknown(doc, {"id", "title", "instructions", "thresholds", "weights",
                          "objects", "actions"}, "scenario")
    thr_doc = dict(_require(doc, "thresholds", "scenario"))
    _reject_unknown(thr_doc, {"time_budget", "motion_budget", "force_limit",
                              "time_slope", "motion_slope"}, "thresholds")
    thresholds = Thresholds(**{k: float(v) for k, v in thr_doc.items()})
    weights = _parse_weights(dict(doc.get("weights", {})))
    objects = tuple(_parse_object(o, i) for i, o in
                    enumerate(_require(doc, "objects", "scenario")))
    actions = tuple(_parse_action(a, i) for i, a in
                    enumerate(_require(doc, "actions", "scenario")))
    return ScenarioDefinition(
        id=str(_require(doc, "id", "scenario")),
        title=str(_require(doc, "title", "scenario")),
        instructions=tuple(str(s) for s in doc.get("instructions", [])),
        actions=actions,
        objects=objects,
        thresholds=thresholds,
        weights=weights,
    )


def bundled_scenario_ids() -> tuple[str, ...]:
    files = resources.files("teletwin.scenarios")
    return tuple(sorted(p.name[:-5] for p in files.iterdir()
                        if p.name.endswith(".json")))


def load_bundled(scenario_id: str) -> ScenarioDefinition:
    files = resources.files("teletwin.scenarios")
    path = files / f"{scenario_id}.json"
    if not path.is_file():
        raise ScenarioError(f"unknown bundled scenario '{scenario_id}'")
    return load_scenario(path.read_text())


# --- runtime --------------------------------------------------------------

def force_proxy(ee_target: Pose, ee_actual: Pose, stiffness: float) -> float:
    """Virtual-spring contact force estimate from target-vs-actual tracking error."""
    if stiffness <= 0:
        raise ValueError("stiffness must be positive")
    return stiffness * float(np.linalg.norm(ee_target.translation - ee_actual.translation))


@dataclass(frozen=True)
class ArmObservation:
    """Per-arm inputs to the event engine for one tick."""
    ee_pose: Pose          # actual tool-tip pose after drive smoothing
    grip: float            # 0 open .. 1 closed
    residual: np.ndarray   # pose_error(target, actual), 6-vector


class ScenarioSession:
    """Mutable single-writer runtime for one scenario playthrough."""

    EXCESSIVE_FORCE_WINDOW = 0.05  # seconds of continuous exceedance

    def __init__(self, definition: ScenarioDefinition,
                 grip_close_threshold: float = 0.8, stiffness: float = 500.0):
        self.definition = definition
        self.grip_close_threshold = grip_close_threshold
        self.stiffness = stiffness
        self.action_index = 0
        self.reps_done = 0
        self.halted = False
        self.completed = False
        self.failed = False
        self.positions: dict[str, np.ndarray] = {
            o.id: o.anchor_point().copy() for o in definition.objects}
        self.attachments: dict[str, str] = {}       # arm key -> object id
        self._attach_offsets: dict[str, np.ndarray] = {}
        self._inside: dict[tuple[str, str], bool] = {}
        self._in_wall: dict[tuple[str, str], bool] = {}
        self._aimed: bool = False
        self._force_time: dict[str, float] = {}
        self._force_fired: dict[str, bool] = {}
        # rings resting on a tower wire at load time are tower-attached
        self._on_tower: dict[str, str] = {}
        for obj in definition.objects:
            if not isinstance(obj.shape, Ring):
                continue
            for tower in definition.objects:
                if not isinstance(tower.shape, Tower):
                    continue
                t = tower.shape
                radial = np.linalg.norm(obj.shape.center[:2] - t.base[:2])
                on_wire = (radial <= obj.shape.radius
                           and t.base[2] <= obj.shape.center[2] <= t.top_z())
                if on_wire:
                    self._on_tower[obj.id] = tower.id
                    break

    @property
    def current_action(self) -> ActionNode | None:
        if self.action_index >= len(self.definition.actions):
            return None
        return self.definition.actions[self.action_index]

    def progress(self) -> dict:
        action = self.current_action
        return {
            "action_index": self.action_index,
            "action_count": len(self.definition.actions),
            "reps_done": self.reps_done,
            "repetitions": action.repetitions if action else 0,
            "kind": action.kind.value if action else None,
            "target": action.target_for(self.reps_done) if action else None,
            "param": action.param_for(self.reps_done) if action else None,
            "halted": self.halted,
            "completed": self.completed,
            "failed": self.failed,
        }

    def _advance(self, tick: int, events: list[SessionEvent]):
        action = self.current_action
        self.reps_done += 1
        if self.reps_done < action.repetitions:
            return
        events.append(SessionEvent(tick, EventKind.ACTION_COMPLETE, action.targets[0]))
        self.action_index += 1
        self.reps_done = 0
        if self.action_index >= len(self.definition.actions):
            events.append(SessionEvent(tick, EventKind.SCENARIO_COMPLETE,
                                       self.definition.id))
            self.completed = True
            self.halted = True

    def _fail(self, tick: int, events: list[SessionEvent]):
        events.append(SessionEvent(tick, EventKind.SCENARIO_FAILED, self.definition.id))
        self.failed = True
        self.halted = True

    def step(self, arms: dict[str, ArmObservation], camera_pose: Pose | None,
             dt: float, tick: int) -> list[SessionEvent]:
        """One fixed tick of event detection. Halted sessions are a no-op."""
        if self.halted:
            return []
        events: list[SessionEvent] = []
        defn = self.definition
        arm_keys = sorted(arms)

        # attached objects rigidly follow their tips
        for key in arm_keys:
            held = self.attachments.get(key)
            if held is not None:
                self.positions[held] = (arms[key].ee_pose.translation
                                        + self._attach_offsets[key])

        # rings slide off the wire once lifted above the tower top
        for ring_id, tower_id in list(self._on_tower.items()):
            tower = defn.object_by_id(tower_id).shape
            if self.positions[ring_id][2] > tower.top_z():
                del self._on_tower[ring_id]

        # grasp / release, left before right for determinism
        for key in arm_keys:
            obs = arms[key]
            tip = obs.ee_pose.translation
            held = self.attachments.get(key)
            closed = obs.grip >= self.grip_close_threshold
            if held is not None and not closed:
                del self.attachments[key]
                del self._attach_offsets[key]
                events.append(SessionEvent(tick, EventKind.RELEASE, held))
                obj = defn.object_by_id(held)
                placed = (obj.placement_target is not None
                          and obj.placement_target.contains(self.positions[held]))
                if placed:
                    action = self.current_action
                    if (action is not None
                            and action.kind in (ActionKind.TRANSFER, ActionKind.PLACE)
                            and action.target_for(self.reps_done) == held):
                        self._advance(tick, events)
                else:
                    events.append(SessionEvent(tick, EventKind.DROP, held))
            elif held is None and closed:
                taken = set(self.attachments.values())
                candidates = [o for o in defn.objects
                              if o.grabbable and o.id not in taken
                              and float(np.linalg.norm(self.positions[o.id] - tip))
                              <= (o.grasp_radius or 0.0)]
                if candidates:
                    obj = min(candidates,
                              key=lambda o: float(np.linalg.norm(self.positions[o.id] - tip)))
                    self.attachments[key] = obj.id
                    self._attach_offsets[key] = self.positions[obj.id] - tip
                    events.append(SessionEvent(tick, EventKind.GRASP, obj.id))
            if self.halted:
                return sort_events(events)

        # force proxy: tower detach fails immediately, sustained excess penalizes
        for key in arm_keys:
            obs = arms[key]
            r = obs.residual
            force = self.stiffness * math.sqrt(
                float(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]))
            held = self.attachments.get(key)
            if held is not None and held in self._on_tower:
                tower = defn.object_by_id(self._on_tower[held]).shape
                if force > tower.detach_force:
                    events.append(SessionEvent(tick, EventKind.TOWER_DETACH, held))
                    self._fail(tick, events)
                    return sort_events(events)
            if force > defn.thresholds.force_limit:
                self._force_time[key] = self._force_time.get(key, 0.0) + dt
                if (self._force_time[key] >= self.EXCESSIVE_FORCE_WINDOW
                        and not self._force_fired.get(key, False)):
                    events.append(SessionEvent(tick, EventKind.EXCESSIVE_FORCE,
                                               held or key))
                    self._force_fired[key] = True
            else:
                self._force_time[key] = 0.0
                self._force_fired[key] = False

        # glass walls: one break per penetration episode per arm
        for key in arm_keys:
            tip = arms[key].ee_pose.translation
            for obj in defn.objects:
                if not isinstance(obj.shape, Shell):
                    continue
                inside = obj.shape.in_wall(tip)
                flag = (key, obj.id)
                if inside and not self._in_wall.get(flag, False):
                    events.append(SessionEvent(tick, EventKind.GLASS_BREAK, obj.id))
                self._in_wall[flag] = inside

        # current action geometry
        action = self.current_action
        if action is not None and action.kind in (ActionKind.TOUCH, ActionKind.PLACE):
            target_id = action.target_for(self.reps_done)
            obj = defn.object_by_id(target_id)
            center = self.positions[target_id]
            radius = obj.shape.radius if isinstance(obj.shape, (Sphere, Ring)) else 0.0
            for key in arm_keys:
                tip = arms[key].ee_pose.translation
                d = tip - center
                inside = math.sqrt(float(d @ d)) <= radius
                flag = (key, target_id)
                if inside and not self._inside.get(flag, False):
                    events.append(SessionEvent(tick, EventKind.TOUCH, target_id))
                    self._inside[flag] = True
                    self._advance(tick, events)
                    if self.halted:
                        return sort_events(events)
                else:
                    self._inside[flag] = inside
        elif action is not None and action.kind is ActionKind.CAMERA_AIM:
            if camera_pose is not None:
                target_id = action.target_for(self.reps_done)
                tolerance = action.param_for(self.reps_done) or DEFAULT_AIM_TOLERANCE
                to_target = self.positions[target_id] - camera_pose.translation
                dist = float(np.linalg.norm(to_target))
                if dist > 1e-9:
                    forward = camera_pose.rotation @ np.array([0.0, 0.0, 1.0])
                    cosang = float(np.dot(forward, to_target / dist))
                    aimed = cosang >= np.cos(tolerance)
                    if aimed and not self._aimed:
                        self._aimed = True
                        self._advance(tick, events)
                        if self.halted:
                            return sort_events(events)
                    else:
                        self._aimed = aimed

        return sort_events(events)
