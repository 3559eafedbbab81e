"""Master-to-slave motion mapping with clutch indexing and camera driving.

Orientation follows the relative-rotation map R_d = R_Mt (R_M0)^T R_EE0 and
position the scaled offset p_d = p_EE0 + alpha (p_Mt - p_M0), both against
anchor frames captured whenever following (re)starts. The clutch decouples
the master so the operator can recenter their hand; release re-anchors with
zero target jump.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .footboard import PedalId, PedalState
from .kinematics import Pose, orthonormalize, rotation_to_rotvec, rotvec_to_rotation


@dataclass(frozen=True)
class TeleopAnchor:
    master_initial: Pose
    ee_initial: Pose


@dataclass(frozen=True)
class TeleopConfig:
    motion_scale: float = 0.25          # alpha, master-to-EE translation ratio
    camera_rotation_scale: float = 0.5
    grip_close_threshold: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.motion_scale <= 1.0:
            raise ValueError("motion_scale must be in (0, 1]")
        if self.camera_rotation_scale <= 0.0:
            raise ValueError("camera_rotation_scale must be positive")
        if not 0.0 <= self.grip_close_threshold <= 1.0:
            raise ValueError("grip_close_threshold must be in [0, 1]")


class ArmMode(str, Enum):
    FOLLOWING = "following"
    CLUTCHED = "clutched"
    CAMERA_DRIVING = "camera_driving"


@dataclass(frozen=True)
class ArmTeleopState:
    anchor: TeleopAnchor
    mode: ArmMode
    ee_target: Pose
    grip_command: float = 0.0


@dataclass(frozen=True)
class CameraState:
    pose: Pose
    thirty_degree_mode: bool = False


def anchor(master_pose: Pose, ee_pose: Pose) -> TeleopAnchor:
    """Capture both frames verbatim at the anchoring instant."""
    return TeleopAnchor(master_pose, ee_pose)


def desired_orientation(a: TeleopAnchor, master_now: np.ndarray) -> np.ndarray:
    """Relative-rotation map of the master onto the anchored EE frame."""
    product = master_now @ a.master_initial.rotation.T @ a.ee_initial.rotation
    return orthonormalize(product)


def desired_position(a: TeleopAnchor, master_pos_now: np.ndarray,
                     alpha: float) -> np.ndarray:
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return a.ee_initial.translation + alpha * (master_pos_now - a.master_initial.translation)


def follow_target(a: TeleopAnchor, master_pose: Pose, alpha: float) -> Pose:
    return Pose(desired_orientation(a, master_pose.rotation),
                desired_position(a, master_pose.translation, alpha))


def _camera_pose(a: TeleopAnchor, master_pose: Pose, cfg: TeleopConfig) -> Pose:
    # translation reuses alpha; the rotation increment is scaled geodesically
    delta = master_pose.rotation @ a.master_initial.rotation.T
    scaled = rotvec_to_rotation(cfg.camera_rotation_scale * rotation_to_rotvec(delta))
    return Pose(orthonormalize(scaled @ a.ee_initial.rotation),
                desired_position(a, master_pose.translation, cfg.motion_scale))


def step_teleop(state: ArmTeleopState, cam: CameraState, master_pose: Pose,
                grip_input: float, pedals: PedalState, cfg: TeleopConfig,
                drives_camera: bool = True) -> tuple[ArmTeleopState, CameraState]:
    """One fixed-tick transition of an arm's teleoperation state machine.

    Camera pedal takes precedence over clutch when both are down. Leaving
    Clutched or CameraDriving re-anchors at the current master pose and the
    frozen EE target, so a stationary master produces zero target jump.
    Only the designated camera-driver arm moves the camera.
    """
    camera_down = pedals.is_pressed(PedalId.CAMERA)
    clutch_down = pedals.is_pressed(PedalId.CLUTCH)
    if camera_down:
        mode = ArmMode.CAMERA_DRIVING
    elif clutch_down:
        mode = ArmMode.CLUTCHED
    else:
        mode = ArmMode.FOLLOWING

    arm_anchor = state.anchor
    new_cam = cam
    if mode is ArmMode.CAMERA_DRIVING:
        if state.mode is not ArmMode.CAMERA_DRIVING:
            arm_anchor = anchor(master_pose, cam.pose)  # camera anchor on entry
        if drives_camera:
            new_cam = replace(cam, pose=_camera_pose(arm_anchor, master_pose, cfg))
        return (replace(state, anchor=arm_anchor, mode=mode), new_cam)

    if mode is ArmMode.CLUTCHED:
        return (replace(state, mode=mode), cam)

    # Following: re-anchor on the release edge out of either frozen mode
    if state.mode is not ArmMode.FOLLOWING:
        arm_anchor = anchor(master_pose, state.ee_target)
    target = follow_target(arm_anchor, master_pose, cfg.motion_scale)
    return (ArmTeleopState(arm_anchor, mode, target, grip_input), cam)


def toggle_thirty_degree(cam: CameraState, pedal_edge: bool) -> CameraState:
    """Flip the 30-degree view on a press edge; the pose never changes here."""
    if not pedal_edge:
        return cam
    return replace(cam, thirty_degree_mode=not cam.thirty_degree_mode)
