"""SE(3) pose algebra, forward kinematics, Jacobians and the numeric IK solver.

Conventions: rotations are 3x3 matrices, translations 3-vectors in meters.
A 6-vector pose stacks [position (m), rotation vector (rad)] in that order,
and joint vectors hold 6 revolute angles in radians.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

_EYE3 = np.eye(3)


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation for a unit axis."""
    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    cc = 1.0 - c
    return np.array([
        [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
        [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
        [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
    ])


def rotvec_to_rotation(v: np.ndarray) -> np.ndarray:
    angle = float(np.linalg.norm(v))
    if angle < 1e-12:
        # second-order series keeps tiny rotations exact to machine precision
        k = skew(v)
        return _EYE3 + k + 0.5 * (k @ k)
    return rotation_about_axis(v / angle, angle)


def rotation_to_rotvec(r: np.ndarray) -> np.ndarray:
    """Principal-branch matrix log of a rotation, as axis*angle.

    At angle exactly pi the axis sign is ambiguous; the branch with a
    positive first nonzero component is returned (documented tie-break).
    """
    w = 0.5 * np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    s = float(np.linalg.norm(w))  # |sin(angle)|
    c = min(max(0.5 * (float(np.trace(r)) - 1.0), -1.0), 1.0)
    angle = math.atan2(s, c)
    if angle < 1e-12:
        return w  # w == sin(angle)*axis ~= rotvec here
    if c > -0.999999:
        return w * (angle / s)
    # near pi: recover axis from the symmetric part, R+R^T = 2I + 2(1-cos)(vv^T - I)
    m = (0.5 * (r + r.T) - c * _EYE3) / (1.0 - c)
    j = int(np.argmax(np.diag(m)))
    v = m[:, j]
    v = v / np.linalg.norm(v)
    if s > 1e-12:
        if float(np.dot(v, w)) < 0.0:
            v = -v
    else:
        for comp in v:
            if abs(comp) > 1e-12:
                if comp < 0.0:
                    v = -v
                break
    return v * angle


def orthonormalize(r: np.ndarray) -> np.ndarray:
    """Project a near-rotation back onto SO(3) via the quaternion round trip."""
    return quat_to_rotation(rotation_to_quat(r))


def rotation_to_quat(r: np.ndarray) -> np.ndarray:
    """Rotation matrix to unit quaternion, w-first, w >= 0."""
    t = float(np.trace(r))
    if t > 0.0:
        s = math.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s, (r[2, 1] - r[1, 2]) / s,
                      (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = math.sqrt(max(1.0 + r[i, i] - r[j, j] - r[k, k], 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def quat_to_rotation(q: np.ndarray) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def normalize_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


@dataclass(frozen=True)
class Pose:
    """Rigid transform: 3x3 rotation + translation in meters."""
    rotation: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_translation(t) -> "Pose":
        return Pose(np.eye(3), np.asarray(t, dtype=float))

    def compose(self, other: "Pose") -> "Pose":
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)

    def inverse(self) -> "Pose":
        rt = self.rotation.T
        return Pose(rt, -(rt @ self.translation))

    def transform_point(self, p: np.ndarray) -> np.ndarray:
        return self.rotation @ p + self.translation

    def copy(self) -> "Pose":
        return Pose(self.rotation.copy(), self.translation.copy())


def pose_to_vector(p: Pose) -> np.ndarray:
    """[translation, rotation vector] 6-vector."""
    return np.concatenate([p.translation, rotation_to_rotvec(p.rotation)])


def vector_to_pose(x: np.ndarray) -> Pose:
    x = np.asarray(x, dtype=float)
    return Pose(rotvec_to_rotation(x[3:6]), x[0:3].copy())


@dataclass(frozen=True)
class Joint:
    """One revolute joint: unit rotation axis and fixed offset in the parent frame."""
    axis: np.ndarray
    offset: Pose
    lower: float
    upper: float

    def __post_init__(self):
        n = float(np.linalg.norm(self.axis))
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"joint axis must be unit length, got norm {n}")
        if self.lower > self.upper:
            raise ValueError("joint lower limit above upper limit")


@dataclass(frozen=True)
class KinematicChain:
    """Serial 6R arm: joints root-to-tip plus a fixed tool-tip offset."""
    joints: tuple[Joint, ...]
    tool_offset: Pose
    home: np.ndarray

    def __post_init__(self):
        if len(self.joints) != 6:
            raise ValueError(f"chain must have exactly 6 joints, got {len(self.joints)}")
        if len(self.home) != 6:
            raise ValueError("home joint vector must have 6 entries")

    @property
    def lower_limits(self) -> np.ndarray:
        return np.array([j.lower for j in self.joints])

    @property
    def upper_limits(self) -> np.ndarray:
        return np.array([j.upper for j in self.joints])

    def max_reach(self) -> float:
        """Sum of link offset lengths: upper bound on tool-tip distance from base."""
        reach = sum(float(np.linalg.norm(j.offset.translation)) for j in self.joints)
        return reach + float(np.linalg.norm(self.tool_offset.translation))


def default_chain() -> KinematicChain:
    """Desk-scale 6R arm: yaw/pitch/pitch shoulder-elbow plus roll/pitch/roll wrist.

    Upper arm 0.30 m along +z, forearm 0.25 m along +x, two 0.05 m wrist
    links and a 0.04 m tool tip. The zero pose is an L-shape, away from
    the wrist singularity (which sits at joint-5 pitch = +-pi/2).
    """
    def j(axis, t, lim):
        return Joint(np.array(axis, dtype=float), Pose.from_translation(t), -lim, lim)

    joints = (
        j((0, 0, 1), (0, 0, 0), 2.6),           # base yaw
        j((0, 1, 0), (0, 0, 0), 2.6),           # shoulder pitch
        j((0, 1, 0), (0, 0, 0.30), 2.6),        # elbow pitch
        j((1, 0, 0), (0.25, 0, 0), math.pi),    # wrist roll
        j((0, 1, 0), (0.05, 0, 0), 2.6),        # wrist pitch
        j((0, 0, 1), (0.05, 0, 0), math.pi),    # tool roll
    )
    return KinematicChain(joints, Pose.from_translation((0.04, 0, 0)), np.zeros(6))


class IkStatus(Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class IkConfig:
    max_iterations: int = 50
    position_tolerance: float = 1e-6     # meters
    orientation_tolerance: float = 1e-6  # radians
    damping_lambda: float = 1e-2
    condition_threshold: float = 1e6
    step_clamp: float = 0.2              # radians per iteration, inf-norm

    def __post_init__(self):
        for name in ("max_iterations", "position_tolerance", "orientation_tolerance",
                     "damping_lambda", "condition_threshold", "step_clamp"):
            if getattr(self, name) <= 0:
                raise ValueError(f"IkConfig.{name} must be strictly positive")


@dataclass(frozen=True)
class IkResult:
    theta: np.ndarray
    iterations: int
    residual: np.ndarray  # 6-vector pose error at theta
    status: IkStatus
    frames: list[Pose] | None = None  # joint frames at theta when requested


def _chain_cache(chain: KinematicChain):
    """Per-chain traversal constants. Identity offsets and principal axes are
    flagged so the traversal can skip multiplications that are exact no-ops."""
    cache = chain.__dict__.get("_traversal")
    if cache is not None:
        return cache
    entries = []
    for j in chain.joints:
        off_rot = None if np.array_equal(j.offset.rotation, _EYE3) else j.offset.rotation
        off_t = j.offset.translation if j.offset.translation.any() else None
        idx = None
        for k in range(3):
            unit = np.zeros(3)
            unit[k] = 1.0
            if np.array_equal(j.axis, unit):
                idx = k
                break
        entries.append((j.axis, idx, off_rot, off_t))
    cache = (tuple(entries), chain.tool_offset.rotation, chain.tool_offset.translation,
             not np.array_equal(chain.tool_offset.rotation, _EYE3))
    object.__setattr__(chain, "_traversal", cache)
    return cache


def forward_kinematics(chain: KinematicChain, theta: np.ndarray) -> Pose:
    """World pose of the tool tip. Joint limits are not enforced here."""
    entries, tool_rot, tool_t, tool_has_rot = _chain_cache(chain)
    rot = _EYE3
    pos = np.zeros(3)
    for i, (axis, _, off_rot, off_t) in enumerate(entries):
        if off_t is not None:
            pos = rot @ off_t + pos
        if off_rot is not None:
            rot = rot @ off_rot
        rot = rot @ rotation_about_axis(axis, float(theta[i]))
    return Pose(rot @ tool_rot if tool_has_rot else rot, rot @ tool_t + pos)


def joint_frames(chain: KinematicChain, theta: np.ndarray) -> list[Pose]:
    """Pose of every joint frame root-to-tip, plus the tool tip (7 entries)."""
    entries, tool_rot, tool_t, tool_has_rot = _chain_cache(chain)
    frames = []
    rot = _EYE3
    pos = np.zeros(3)
    for i, (axis, _, off_rot, off_t) in enumerate(entries):
        if off_t is not None:
            pos = rot @ off_t + pos
        if off_rot is not None:
            rot = rot @ off_rot
        rot = rot @ rotation_about_axis(axis, float(theta[i]))
        frames.append(Pose(rot, pos))
    frames.append(Pose(rot @ tool_rot if tool_has_rot else rot, rot @ tool_t + pos))
    return frames


def pose_error(target: Pose, current: Pose) -> np.ndarray:
    """6-vector error: position difference and rotation vector of R_t R_c^T."""
    dp = target.translation - current.translation
    dr = rotation_to_rotvec(target.rotation @ current.rotation.T)
    return np.concatenate([dp, dr])


def _fk_and_jacobian(chain: KinematicChain, theta: np.ndarray,
                     frames_out: list | None = None,
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One chain traversal: (tip rotation, tip position, 6x6 Jacobian).

    With frames_out, the per-joint frames plus tool tip are appended exactly
    as joint_frames() would produce them.
    """
    entries, tool_rot, tool_t, tool_has_rot = _chain_cache(chain)
    axes = np.empty((6, 3))
    origins = np.empty((6, 3))
    rot = _EYE3
    pos = np.zeros(3)
    for i, (axis, idx, off_rot, off_t) in enumerate(entries):
        if off_t is not None:
            pos = rot @ off_t + pos
        if off_rot is not None:
            rot = rot @ off_rot
        axes[i] = rot[:, idx] if idx is not None else rot @ axis
        origins[i] = pos
        rot = rot @ rotation_about_axis(axis, float(theta[i]))
        if frames_out is not None:
            frames_out.append(Pose(rot, pos))
    p_tip = rot @ tool_t + pos
    r_tip = rot @ tool_rot if tool_has_rot else rot
    if frames_out is not None:
        frames_out.append(Pose(r_tip, p_tip))
    jac = np.empty((6, 6))
    r = p_tip - origins
    # manual cross product: np.cross has high overhead at this size
    jac[0] = axes[:, 1] * r[:, 2] - axes[:, 2] * r[:, 1]
    jac[1] = axes[:, 2] * r[:, 0] - axes[:, 0] * r[:, 2]
    jac[2] = axes[:, 0] * r[:, 1] - axes[:, 1] * r[:, 0]
    jac[3:6] = axes.T
    return r_tip, p_tip, jac


def geometric_jacobian(chain: KinematicChain, theta: np.ndarray) -> np.ndarray:
    """6x6 world-frame Jacobian; rows match the [position, rotation] 6-vector layout.

    Column i is (axis_i x (p_tip - p_i), axis_i) in the world frame.
    """
    return _fk_and_jacobian(chain, theta)[2]


def numeric_jacobian(chain: KinematicChain, theta: np.ndarray, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of the pose-error-composed FK (test oracle)."""
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    theta = np.asarray(theta, dtype=float)
    jac = np.empty((6, 6))
    for i in range(6):
        d = np.zeros(6)
        d[i] = h
        hi = forward_kinematics(chain, theta + d)
        lo = forward_kinematics(chain, theta - d)
        jac[:, i] = pose_error(hi, lo) / (2.0 * h)
    return jac


def clamp_to_limits(chain: KinematicChain, theta: np.ndarray) -> np.ndarray:
    return np.clip(theta, chain.lower_limits, chain.upper_limits)


def smooth_joint_step(current: np.ndarray, desired: np.ndarray, dt: float,
                      rate_limit: float) -> np.ndarray:
    """Move toward desired with per-joint speed capped at rate_limit rad/s."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    budget = rate_limit * dt
    delta = np.clip(np.asarray(desired, dtype=float) - current, -budget, budget)
    return current + delta


def _normalize_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized wrap to (-pi, pi]."""
    wrapped = np.mod(theta + math.pi, 2.0 * math.pi)
    return np.where(wrapped == 0.0, math.pi, wrapped - math.pi)


def solve_ik(chain: KinematicChain, target: Pose, seed: np.ndarray,
             cfg: IkConfig = IkConfig(), collect_frames: bool = False) -> IkResult:
    """Newton iteration theta += J^-1 * pose_error, damped near singularities.

    Damped least squares (J^T J + lambda^2 I)^-1 J^T replaces the plain
    inverse when the (Frobenius-norm) condition number of J exceeds
    cfg.condition_threshold. Steps are clamped to cfg.step_clamp in the
    inf-norm and iterates stay inside joint limits. Deterministic for
    fixed inputs. collect_frames attaches the joint frames at the returned
    theta to the result.
    """
    lower = chain.lower_limits
    upper = chain.upper_limits
    theta = np.clip(_normalize_angles(np.asarray(seed, dtype=float)), lower, upper)
    target_rt = target.rotation.T
    target_p = target.translation
    lam2_eye = (cfg.damping_lambda * cfg.damping_lambda) * np.eye(6)
    prev_norm = math.inf
    growth_streak = 0
    residual = np.empty(6)
    frames = None
    for iteration in range(cfg.max_iterations + 1):
        frames = [] if collect_frames else None
        r_tip, p_tip, jac = _fk_and_jacobian(chain, theta, frames)
        residual[0:3] = target_p - p_tip
        residual[3:6] = rotation_to_rotvec((r_tip @ target_rt).T)
        if (math.sqrt(float(residual[0:3] @ residual[0:3])) < cfg.position_tolerance
                and math.sqrt(float(residual[3:6] @ residual[3:6])) < cfg.orientation_tolerance):
            return IkResult(theta, iteration, residual.copy(), IkStatus.CONVERGED, frames)
        if iteration == cfg.max_iterations:
            break
        norm = math.sqrt(float(residual @ residual))
        if norm > prev_norm:
            growth_streak += 1
            if growth_streak >= 5:
                return IkResult(theta, iteration, residual.copy(), IkStatus.DIVERGED,
                                frames)
        else:
            growth_streak = 0
        prev_norm = norm

        step = None
        try:
            jinv = np.linalg.inv(jac)
            cond = math.sqrt(float(np.sum(jac * jac)) * float(np.sum(jinv * jinv)))
            if cond <= cfg.condition_threshold:
                step = jinv @ residual
        except np.linalg.LinAlgError:
            pass
        if step is None:
            step = np.linalg.solve(jac.T @ jac + lam2_eye, jac.T @ residual)
        biggest = float(np.max(np.abs(step)))
        if biggest > cfg.step_clamp:
            step *= cfg.step_clamp / biggest
        theta = np.clip(_normalize_angles(theta + step), lower, upper)
    return IkResult(theta, cfg.max_iterations, residual.copy(), IkStatus.MAX_ITERATIONS,
                    frames)
