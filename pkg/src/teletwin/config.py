"""Engine configuration: every knob of the simulation, serializable and versioned.

A config file is JSON; omitted keys fall back to the built-in defaults, so
an empty object {} is a valid file. Unknown keys are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .footboard import PedalId, PedalLayout, PedalRegion, default_layout
from .kinematics import (
    IkConfig,
    Joint,
    KinematicChain,
    Pose,
    default_chain,
    quat_to_rotation,
    rotation_to_quat,
)
from .teleop import TeleopConfig

CONFIG_FORMAT = "teletwin-config"
CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Raised on malformed config documents; the message names the field."""


def _default_camera_pose() -> Pose:
    # perched behind the arms, boresight (+z) on the work zone
    eye = np.array([0.15, 0.0, 0.45])
    look = np.array([0.45, 0.0, 0.29])
    d = look - eye
    d /= np.linalg.norm(d)
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(z, d)
    n = float(np.linalg.norm(axis))
    if n < 1e-12:
        rot = np.eye(3)
    else:
        from .kinematics import rotation_about_axis
        rot = rotation_about_axis(axis / n, float(math.acos(np.clip(np.dot(z, d), -1, 1))))
    return Pose(rot, eye)


@dataclass(frozen=True)
class EngineConfig:
    tick_seconds: float = 0.01
    teleop: TeleopConfig = field(default_factory=TeleopConfig)
    ik: IkConfig = field(default_factory=IkConfig)
    chain_left: KinematicChain = field(default_factory=default_chain)
    chain_right: KinematicChain = field(default_factory=default_chain)
    base_left: Pose = field(default_factory=lambda: Pose.from_translation((0.0, 0.12, 0.0)))
    base_right: Pose = field(default_factory=lambda: Pose.from_translation((0.0, -0.12, 0.0)))
    camera_pose: Pose = field(default_factory=_default_camera_pose)
    pedal_layout: PedalLayout = field(default_factory=default_layout)
    rate_limit: float = 4.0      # rad/s articulation smoothing
    beta: float = 0.05           # meters per radian in economy of motion
    stiffness: float = 500.0     # force-proxy spring, units per meter
    minimap_gain: float = 2.0    # foot icon scale per meter of height

    def __post_init__(self):
        if self.tick_seconds <= 0:
            raise ConfigError("tick_seconds must be positive")
        for name in ("rate_limit", "beta", "stiffness", "minimap_gain"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    def chain(self, side: str) -> KinematicChain:
        return self.chain_left if side == "left" else self.chain_right

    def base(self, side: str) -> Pose:
        return self.base_left if side == "left" else self.base_right


# --- serialization --------------------------------------------------------

def pose_to_dict(p: Pose) -> dict:
    return {"pos": [round(float(x), 12) for x in p.translation],
            "quat": [round(float(x), 12) for x in rotation_to_quat(p.rotation)]}


def pose_from_dict(doc: dict, where: str) -> Pose:
    try:
        pos = np.asarray(doc["pos"], dtype=float)
        quat = np.asarray(doc["quat"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: pose needs 'pos' and 'quat': {exc}") from None
    if pos.shape != (3,) or quat.shape != (4,):
        raise ConfigError(f"{where}: pose must carry a 3-vector and a quaternion")
    return Pose(quat_to_rotation(quat), pos)


def chain_to_dict(chain: KinematicChain) -> dict:
    return {
        "joints": [{
            "axis": [float(x) for x in j.axis],
            "offset": pose_to_dict(j.offset),
            "lower": j.lower,
            "upper": j.upper,
        } for j in chain.joints],
        "tool_offset": pose_to_dict(chain.tool_offset),
        "home": [float(x) for x in chain.home],
    }


def chain_from_dict(doc: dict, where: str) -> KinematicChain:
    try:
        joints = tuple(
            Joint(np.asarray(j["axis"], dtype=float),
                  pose_from_dict(j["offset"], f"{where}.joints[{i}].offset"),
                  float(j["lower"]), float(j["upper"]))
            for i, j in enumerate(doc["joints"]))
        tool = pose_from_dict(doc["tool_offset"], f"{where}.tool_offset")
        home = np.asarray(doc["home"], dtype=float)
        return KinematicChain(joints, tool, home)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad chain description: {exc}") from None


def layout_to_dict(layout: PedalLayout) -> dict:
    return {"regions": [{
        "pedal": r.pedal.value,
        "min": [float(x) for x in r.min_corner],
        "max": [float(x) for x in r.max_corner],
        "press_height": r.press_height,
    } for r in layout.regions]}


def layout_from_dict(doc: dict, where: str) -> PedalLayout:
    try:
        regions = tuple(
            PedalRegion(PedalId(r["pedal"]),
                        np.asarray(r["min"], dtype=float),
                        np.asarray(r["max"], dtype=float),
                        float(r.get("press_height", 0.02)))
            for r in doc["regions"])
        return PedalLayout(regions)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad pedal layout: {exc}") from None


_TOP_KEYS = {"format", "version", "tick_seconds", "teleop", "ik", "chain",
             "chain_left", "chain_right", "arm_bases", "camera_pose",
             "pedal_layout", "rate_limit", "beta", "stiffness", "minimap_gain"}


def config_to_dict(cfg: EngineConfig) -> dict:
    return {
        "format": CONFIG_FORMAT,
        "version": CONFIG_VERSION,
        "tick_seconds": cfg.tick_seconds,
        "teleop": {
            "motion_scale": cfg.teleop.motion_scale,
            "camera_rotation_scale": cfg.teleop.camera_rotation_scale,
            "grip_close_threshold": cfg.teleop.grip_close_threshold,
        },
        "ik": {
            "max_iterations": cfg.ik.max_iterations,
            "position_tolerance": cfg.ik.position_tolerance,
            "orientation_tolerance": cfg.ik.orientation_tolerance,
            "damping_lambda": cfg.ik.damping_lambda,
            "condition_threshold": cfg.ik.condition_threshold,
            "step_clamp": cfg.ik.step_clamp,
        },
        "chain_left": chain_to_dict(cfg.chain_left),
        "chain_right": chain_to_dict(cfg.chain_right),
        "arm_bases": {"left": pose_to_dict(cfg.base_left),
                      "right": pose_to_dict(cfg.base_right)},
        "camera_pose": pose_to_dict(cfg.camera_pose),
        "pedal_layout": layout_to_dict(cfg.pedal_layout),
        "rate_limit": cfg.rate_limit,
        "beta": cfg.beta,
        "stiffness": cfg.stiffness,
        "minimap_gain": cfg.minimap_gain,
    }


def dump_config(cfg: EngineConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=False) + "\n"


def config_from_dict(doc: dict) -> EngineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s) {sorted(unknown)}")
    if doc.get("format", CONFIG_FORMAT) != CONFIG_FORMAT:
        raise ConfigError(f"not a {CONFIG_FORMAT} document")
    if int(doc.get("version", CONFIG_VERSION)) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {doc.get('version')}")

    defaults = EngineConfig()
    teleop = defaults.teleop
    if "teleop" in doc:
        merged = {"motion_scale": teleop.motion_scale,
                  "camera_rotation_scale": teleop.camera_rotation_scale,
                  "grip_close_threshold": teleop.grip_close_threshold}
        unknown = set(doc["teleop"]) - set(merged)
        if unknown:
            raise ConfigError(f"unknown teleop key(s) {sorted(unknown)}")
        merged.update(doc["teleop"])
        try:
            teleop = TeleopConfig(**merged)
        except ValueError as exc:
            raise ConfigError(f"teleop: {exc}") from None
    ik = defaults.ik
    if "ik" in doc:
        merged = {"max_iterations": ik.max_iterations,
                  "position_tolerance": ik.position_tolerance,
                  "orientation_tolerance": ik.orientation_tolerance,
                  "damping_lambda": ik.damping_lambda,
                  "condition_threshold": ik.condition_threshold,
                  "step_clamp": ik.step_clamp}
        unknown = set(doc["ik"]) - set(merged)
        if unknown:
            raise ConfigError(f"unknown ik key(s) {sorted(unknown)}")
        merged.update(doc["ik"])
        try:
            ik = IkConfig(**merged)
        except ValueError as exc:
            raise ConfigError(f"ik: {exc}") from None

    shared_chain = chain_from_dict(doc["chain"], "chain") if "chain" in doc else None
    chain_left = (chain_from_dict(doc["chain_left"], "chain_left")
                  if "chain_left" in doc else shared_chain or defaults.chain_left)
    chain_right = (chain_from_dict(doc["chain_right"], "chain_right")
                   if "chain_right" in doc else shared_chain or defaults.chain_right)

    base_left, base_right = defaults.base_left, defaults.base_right
    if "arm_bases" in doc:
        bases = doc["arm_bases"]
        unknown = set(bases) - {"left", "right"}
        if unknown:
            raise ConfigError(f"unknown arm_bases key(s) {sorted(unknown)}")
        if "left" in bases:
            base_left = pose_from_dict(bases["left"], "arm_bases.left")
        if "right" in bases:
            base_right = pose_from_dict(bases["right"], "arm_bases.right")

    camera = (pose_from_dict(doc["camera_pose"], "camera_pose")
              if "camera_pose" in doc else defaults.camera_pose)
    layout = (layout_from_dict(doc["pedal_layout"], "pedal_layout")
              if "pedal_layout" in doc else defaults.pedal_layout)

    try:
        return EngineConfig(
            tick_seconds=float(doc.get("tick_seconds", defaults.tick_seconds)),
            teleop=teleop, ik=ik,
            chain_left=chain_left, chain_right=chain_right,
            base_left=base_left, base_right=base_right,
            camera_pose=camera, pedal_layout=layout,
            rate_limit=float(doc.get("rate_limit", defaults.rate_limit)),
            beta=float(doc.get("beta", defaults.beta)),
            stiffness=float(doc.get("stiffness", defaults.stiffness)),
            minimap_gain=float(doc.get("minimap_gain", defaults.minimap_gain)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(text: str) -> EngineConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(doc)
