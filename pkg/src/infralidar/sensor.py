"""Frame assembly: schedule beams, resolve poses, cast, ghost-resolve, and
apply the range model.

Randomness is slot-addressed: every beam reads its own pre-drawn values from
streams keyed on (seed, frame_index), so results are independent of
execution order and worker count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from hashlib import blake2b

import numpy as np

from .errors import ContractViolationError, TrajectoryError
from .ghost import GhostConfig, resolve_batch
from .motion import DistortionConfig, Pose, Trajectory, partition_subframes, pose_at, poses_at
from .patterns import PatternConfig, generate_pattern
from .scene import Scene, cast_rays


@dataclass(frozen=True)
class LidarModel:
    """Sensor preset: emission pattern plus the range/noise envelope."""

    pattern: PatternConfig
    range_min: float  # m, blind zone
    range_max: float  # m
    range_noise_sigma: float = 0.0  # m, 1-sigma Gaussian along the ray
    dropout_probability: float = 0.0
    ghost: GhostConfig = field(default_factory=GhostConfig)
    name: str = ""

    def __post_init__(self):
        if not (0.0 <= self.range_min < self.range_max):
            raise ContractViolationError("need 0 <= range_min < range_max")
        if self.range_noise_sigma < 0.0:
            raise ContractViolationError("range_noise_sigma must be >= 0")
        if not (0.0 <= self.dropout_probability <= 1.0):
            raise ContractViolationError("dropout_probability must be in [0, 1]")


@dataclass(frozen=True)
class LidarPoint:
    """One simulated return (sensor frame at frame start)."""

    position: np.ndarray  # (3,) m
    intensity: float  # = surface reflectivity
    timestamp: float  # s, absolute
    semantic_label: int
    is_ghost: bool
    channel: int


@dataclass(frozen=True)
class PointCloudFrame:
    """One frame of returns plus the poses that produced it.

    Positions are in the frame-start sensor frame (what an uncompensated
    sensor reports); ``world_points`` applies the recorded start pose.
    """

    positions: np.ndarray  # (n, 3)
    intensity: np.ndarray  # (n,)
    timestamps: np.ndarray  # (n,) absolute s
    labels: np.ndarray  # (n,) int32 semantic codes
    is_ghost: np.ndarray  # (n,) bool
    channels: np.ndarray  # (n,) int32
    frame_index: int
    seed: int
    start_pose: Pose
    subframe_poses: tuple[tuple[float, Pose], ...]  # (absolute t, pose) when distortion is on
    frame_start: float
    frame_period: float
    lidar_name: str = ""

    def __len__(self) -> int:
        return self.positions.shape[0]

    def world_points(self) -> np.ndarray:
        """Project stored points into the world frame via the start pose."""
        return self.start_pose.apply(self.positions)

    def ranges(self) -> np.ndarray:
        """Measured range per point (norm in the emitting-pose frame)."""
        return np.linalg.norm(self.positions, axis=1)

    def points(self) -> list[LidarPoint]:
        return [LidarPoint(self.positions[i], float(self.intensity[i]),
                           float(self.timestamps[i]), int(self.labels[i]),
                           bool(self.is_ghost[i]), int(self.channels[i]))
                for i in range(len(self))]


def beam_rng_streams(seed: int, frame_index: int, n: int):
    """Pre-draw the per-beam random slots for one frame.

    Returns (ghost trigger uniforms, dropout uniforms, standard normals),
    each of length n. Slot i is a pure function of (seed, frame_index, i).
    """
    digest = blake2b(struct.pack("<qq", seed, frame_index), digest_size=16).digest()
    key = np.frombuffer(digest, dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u_ghost = gen.uniform(size=n)
    u_drop = gen.uniform(size=n)
    z = gen.standard_normal(n)
    return u_ghost, u_drop, z


def apply_range_model(true_distance: float, lidar: LidarModel,
                      rng: np.random.Generator) -> float | None:
    """Gate a true distance through blind zone / max range / dropout, then add noise."""
    if true_distance <= 0.0:
        raise ContractViolationError("true_distance must be > 0")
    if true_distance < lidar.range_min or true_distance > lidar.range_max:
        return None
    if lidar.dropout_probability > 0.0 and rng.uniform() < lidar.dropout_probability:
        return None
    if lidar.range_noise_sigma > 0.0:
        return float(true_distance + rng.normal(0.0, lidar.range_noise_sigma))
    return float(true_distance)


def _range_model_batch(distance, lidar: LidarModel, u_drop, z):
    """Vectorized twin of apply_range_model using pre-drawn slots."""
    keep = (distance >= lidar.range_min) & (distance <= lidar.range_max)
    if lidar.dropout_probability > 0.0:
        keep &= u_drop >= lidar.dropout_probability
    measured = distance + lidar.range_noise_sigma * z if lidar.range_noise_sigma > 0.0 \
        else distance.copy()
    return keep, measured


def simulate_frame(scene: Scene, lidar: LidarModel, trajectory: Trajectory,
                   frame_index: int = 0, options: DistortionConfig | None = None,
                   seed: int = 0, pattern_continuation: bool = False) -> PointCloudFrame:
    """Simulate one frame of returns.

    With distortion off every beam is cast from the frame-start pose; with
    distortion on, the schedule is split into N chronological sub-frames and
    each batch fires from the pose at its batch start (or per sample in
    per-point mode). Output is ordered by beam index and fully determined by
    (scene, lidar, trajectory, frame_index, options, seed).
    """
    options = options or DistortionConfig()
    pattern = generate_pattern(lidar.pattern, frame_index, pattern_continuation)
    period = pattern.frame_period
    frame_start = frame_index * period
    if not trajectory.covers(frame_start, frame_start + period):
        raise TrajectoryError(
            f"trajectory does not cover frame {frame_index} "
            f"([{frame_start}, {frame_start + period}] s)")

    n = len(pattern)
    dirs_pattern = pattern.directions()
    u_ghost, u_drop, z = beam_rng_streams(seed, frame_index, n)
    start_pose = pose_at(trajectory, frame_start)

    if options.enabled and options.per_point:
        batch_plan = None  # poses per sample
    elif options.enabled:
        batch_plan = partition_subframes(pattern, options.subframes)
    else:
        batch_plan = [None]  # single batch at frame start

    distance = np.full(n, np.inf)
    surface = np.full(n, -1, dtype=np.int32)
    ghost_flag = np.zeros(n, dtype=bool)
    keep = np.zeros(n, dtype=bool)
    subframe_poses: list[tuple[float, Pose]] = []

    def run_batch(sl: slice, origins: np.ndarray, world_dirs: np.ndarray):
        tri, t = cast_rays(scene, origins, world_dirs, t_min=0.0, t_max=lidar.range_max)
        k, d, s, g = resolve_batch(scene, origins, world_dirs, tri, t,
                                   lidar.ghost, u_ghost[sl], t_max=lidar.range_max)
        keep[sl], distance[sl], surface[sl], ghost_flag[sl] = k, d, s, g

    if batch_plan is None:
        ts = frame_start + pattern.t_offset
        trans, mats = poses_at(trajectory, ts)
        world_dirs = np.einsum("nij,nj->ni", mats, dirs_pattern)
        world_dirs = np.ascontiguousarray(world_dirs)
        run_batch(slice(0, n), np.ascontiguousarray(trans), world_dirs)
    else:
        for batch in batch_plan:
            if batch is None:
                sl = slice(0, n)
                pose = start_pose
            else:
                sl = slice(batch.start, batch.stop)
                pose = pose_at(trajectory, frame_start + batch.pose_time)
                subframe_poses.append((frame_start + batch.pose_time, pose))
            if sl.stop == sl.start:
                continue
            rot = pose.rotation_matrix()
            world_dirs = np.ascontiguousarray(dirs_pattern[sl] @ rot.T)
            origins = np.ascontiguousarray(
                np.broadcast_to(pose.translation, (sl.stop - sl.start, 3)))
            run_batch(sl, origins, world_dirs)

    ok, measured = _range_model_batch(distance, lidar, u_drop, z)
    ok &= keep
    # An uncompensated sensor books the measured range along the pattern
    # direction as if the whole frame shared one pose; that is what makes
    # moving-sensor frames smear.
    positions = measured[ok, None] * dirs_pattern[ok]
    labels = np.zeros(ok.sum(), dtype=np.int32)
    intensity = np.zeros(ok.sum())
    sel = surface[ok]
    valid_surface = sel >= 0
    labels[valid_surface] = scene.surface_label[sel[valid_surface]]
    intensity[valid_surface] = scene.surface_reflectivity[sel[valid_surface]]

    return PointCloudFrame(
        positions=np.ascontiguousarray(positions),
        intensity=intensity,
        timestamps=frame_start + pattern.t_offset[ok],
        labels=labels,
        is_ghost=ghost_flag[ok],
        channels=pattern.channel[ok].copy(),
        frame_index=frame_index,
        seed=seed,
        start_pose=start_pose,
        subframe_poses=tuple(subframe_poses),
        frame_start=frame_start,
        frame_period=period,
        lidar_name=lidar.name,
    )


def merge_world_clouds(frames: list[PointCloudFrame]):
    """Union of frames projected to world coordinates.

    Returns (xyz, labels, is_ghost, intensity) arrays in input order.
    """
    if not frames:
        z = np.empty((0, 3))
        return z, np.empty(0, dtype=np.int32), np.empty(0, dtype=bool), np.empty(0)
    xyz = np.concatenate([f.world_points() for f in frames], axis=0)
    labels = np.concatenate([f.labels for f in frames])
    ghost = np.concatenate([f.is_ghost for f in frames])
    intensity = np.concatenate([f.intensity for f in frames])
    return xyz, labels, ghost, intensity
