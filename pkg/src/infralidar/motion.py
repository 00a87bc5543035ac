"""Sensor poses, trajectories, and the sub-frame partitioning that produces
motion distortion.

Rotations use the ZYX intrinsic (yaw-pitch-roll) convention everywhere a
Euler triple appears; quaternions are scalar-last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import ContractViolationError, TrajectoryError
from .patterns import Pattern


@dataclass(frozen=True)
class Pose:
    """Rigid transform: world_from_sensor."""

    translation: np.ndarray  # (3,) m
    rotation: np.ndarray  # (4,) unit quaternion, scalar-last

    def __post_init__(self):
        t = np.ascontiguousarray(self.translation, dtype=np.float64)
        q = np.ascontiguousarray(self.rotation, dtype=np.float64)
        if t.shape != (3,) or q.shape != (4,):
            raise ContractViolationError("pose needs a 3-vector translation and a quaternion")
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > 1e-9:
            raise ContractViolationError("pose rotation must be normalized within 1e-9")
        q = q / norm
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3), np.array([0.0, 0.0, 0.0, 1.0]))

    @classmethod
    def from_rpy(cls, translation, roll: float = 0.0, pitch: float = 0.0,
                 yaw: float = 0.0) -> "Pose":
        q = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_quat()
        return cls(np.asarray(translation, dtype=np.float64), q)

    def rotation_matrix(self) -> np.ndarray:
        return Rotation.from_quat(self.rotation).as_matrix()

    def to_rpy(self) -> tuple[float, float, float]:
        yaw, pitch, roll = Rotation.from_quat(self.rotation).as_euler("ZYX")
        return float(roll), float(pitch), float(yaw)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform sensor-frame points into the world frame."""
        return np.asarray(points) @ self.rotation_matrix().T + self.translation

    def almost_equal(self, other: "Pose", tol: float = 1e-12) -> bool:
        qd = min(np.abs(self.rotation - other.rotation).max(),
                 np.abs(self.rotation + other.rotation).max())
        return bool(np.abs(self.translation - other.translation).max() <= tol and qd <= tol)


def _slerp(q0: np.ndarray, q1: np.ndarray, alpha: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between two unit quaternions."""
    dot = float(q0 @ q1)
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > 1.0 - 1e-12:
        q = q0 + alpha * (q1 - q0)
        return q / np.linalg.norm(q)
    theta = np.arccos(min(dot, 1.0))
    s = np.sin(theta)
    q = (np.sin((1.0 - alpha) * theta) * q0 + np.sin(alpha * theta) * q1) / s
    return q / np.linalg.norm(q)


@dataclass(frozen=True)
class Trajectory:
    """Time-sorted pose keyframes; a single keyframe means 'static, valid for all t'."""

    times: np.ndarray  # (k,) s, strictly increasing
    poses: tuple[Pose, ...]

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size == 0 or t.size != len(self.poses):
            raise TrajectoryError("trajectory needs matching, non-empty times and poses")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise TrajectoryError("keyframe times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "poses", tuple(self.poses))

    @classmethod
    def static(cls, pose: Pose) -> "Trajectory":
        return cls(np.zeros(1), (pose,))

    @classmethod
    def from_keyframes(cls, keyframes) -> "Trajectory":
        keyframes = list(keyframes)
        return cls(np.asarray([t for t, _ in keyframes], dtype=np.float64),
                   tuple(p for _, p in keyframes))

    @property
    def is_static(self) -> bool:
        return len(self.poses) == 1

    def covers(self, t0: float, t1: float) -> bool:
        if self.is_static:
            return True
        return self.times[0] <= t0 and t1 <= self.times[-1]


def pose_at(trajectory: Trajectory, t: float) -> Pose:
    """Interpolated pose: linear translation, shortest-arc rotation.

    Raises TrajectoryError outside keyframe coverage; no extrapolation.
    """
    if trajectory.is_static:
        return trajectory.poses[0]
    times = trajectory.times
    if t < times[0] or t > times[-1]:
        raise TrajectoryError(
            f"t={t} outside trajectory coverage [{times[0]}, {times[-1]}]")
    i = int(np.searchsorted(times, t, side="right")) - 1
    if i >= len(times) - 1:
        return trajectory.poses[-1]
    if t == times[i]:
        return trajectory.poses[i]
    alpha = (t - times[i]) / (times[i + 1] - times[i])
    p0, p1 = trajectory.poses[i], trajectory.poses[i + 1]
    return Pose((1.0 - alpha) * p0.translation + alpha * p1.translation,
                _slerp(p0.rotation, p1.rotation, alpha))


def poses_at(trajectory: Trajectory, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized pose sampling; returns translations (n, 3) and matrices (n, 3, 3)."""
    ts = np.asarray(ts, dtype=np.float64)
    if trajectory.is_static:
        p = trajectory.poses[0]
        return (np.broadcast_to(p.translation, (ts.size, 3)),
                np.broadcast_to(p.rotation_matrix(), (ts.size, 3, 3)))
    if ts.size and (ts.min() < trajectory.times[0] or ts.max() > trajectory.times[-1]):
        raise TrajectoryError("sample times outside trajectory coverage")
    trans = np.stack([np.interp(ts, trajectory.times, [p.translation[k] for p in trajectory.poses])
                      for k in range(3)], axis=1)
    from scipy.spatial.transform import Slerp
    slerp = Slerp(trajectory.times, Rotation.from_quat([p.rotation for p in trajectory.poses]))
    return trans, slerp(ts).as_matrix()


@dataclass(frozen=True)
class DistortionConfig:
    """Continuous-acquisition model: the frame is split into N sub-frames."""

    enabled: bool = False
    subframes: int = 32
    per_point: bool = False  # pose per sample instead of per sub-frame (N -> inf limit)

    def __post_init__(self):
        if self.subframes < 1:
            raise ContractViolationError("subframes must be >= 1")


@dataclass(frozen=True)
class SubframeBatch:
    """Chronological slice of a pattern with the pose time used for the whole batch."""

    pose_time: float  # s from frame start
    start: int
    stop: int


def partition_subframes(pattern: Pattern, n: int) -> list[SubframeBatch]:
    """Split a time-sorted pattern into n chronological batches.

    Batch k holds samples with t_offset in [k*T/n, (k+1)*T/n); the batch pose
    time is the batch start. Concatenating the batches reproduces the pattern.
    """
    if n < 1:
        raise ContractViolationError("subframe count must be >= 1")
    period = pattern.frame_period
    edges = np.arange(n + 1) * (period / n)
    cuts = np.searchsorted(pattern.t_offset, edges, side="left")
    cuts[0], cuts[-1] = 0, len(pattern)
    return [SubframeBatch(pose_time=float(edges[k]), start=int(cuts[k]), stop=int(cuts[k + 1]))
            for k in range(n)]


def accumulate_frame(batches: list[dict]) -> dict:
    """Concatenate per-batch point bundles (chronological order) into one frame bundle."""
    if not batches:
        return {}
    keys = batches[0].keys()
    return {k: np.concatenate([b[k] for b in batches], axis=0) for k in keys}
