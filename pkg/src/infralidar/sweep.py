"""Placement enumeration, evaluation, and ranking.

A candidate is a set of sensor poses bound to LiDAR presets. Evaluation
simulates every sensor on the (traffic-free) scene, merges the world-frame
clouds, and scores the union with the region metrics. Candidates are
independent jobs; results are always reported in candidate order so a sweep
rerun is byte-identical.
"""

from __future__ import annotations

import itertools
import json
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from hashlib import blake2b
from pathlib import Path

import numpy as np

from .errors import SweepSpecError
from .io_formats import DEG, load_lidar_preset, parse_lob
from .metrics import InfraLob, MetricsReport, NucParams, compute_metrics
from .motion import DistortionConfig, Pose, Trajectory
from .scene import Scene, cast_rays
from .sensor import LidarModel, PointCloudFrame, merge_world_clouds, simulate_frame


@dataclass(frozen=True)
class SensorPlacement:
    """One sensor of a candidate: preset id plus mounting pose."""

    preset: str
    position: tuple[float, float, float]
    rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)  # rad

    def pose(self) -> Pose:
        return Pose.from_rpy(self.position, *self.rpy)

    def to_dict(self) -> dict:
        return {"preset": self.preset, "position": list(self.position),
                "rpy": list(self.rpy)}


@dataclass(frozen=True)
class PlacementCandidate:
    id: str
    sensors: tuple[SensorPlacement, ...]

    def __post_init__(self):
        if not self.sensors:
            raise SweepSpecError(f"candidate {self.id!r} has no sensors")
        for s in self.sensors:
            if not np.isfinite(list(s.position) + list(s.rpy)).all():
                raise SweepSpecError(f"candidate {self.id!r} has a non-finite pose")

    def to_dict(self) -> dict:
        return {"id": self.id, "sensors": [s.to_dict() for s in self.sensors]}


@dataclass(frozen=True)
class MetricConfig:
    """Everything evaluate_placement needs besides the scene and candidate."""

    lob: InfraLob
    nuc: NucParams = field(default_factory=NucParams)
    nuc_label_filter: tuple[str, ...] | None = ("road",)
    density_label_filter: tuple[str, ...] | None = None


@dataclass(frozen=True)
class SweepResult:
    candidate: PlacementCandidate
    report: MetricsReport
    score: float
    rank: int

    def to_dict(self) -> dict:
        return {"candidate": self.candidate.to_dict(), "report": self.report.to_dict(),
                "score": self.score, "rank": self.rank}


def _sensor_seed(seed: int, sensor_index: int) -> int:
    """Stable per-sensor stream: sensor i sees the same draws in any candidate."""
    digest = blake2b(struct.pack("<qq", seed, sensor_index), digest_size=8).digest()
    return int.from_bytes(digest, "little", signed=False) >> 1


def _parse_sensor(doc: dict, default_preset: str | None, where: str) -> SensorPlacement:
    preset = doc.get("preset", default_preset)
    if preset is None:
        raise SweepSpecError(f"{where}: no preset given and no default_preset in spec")
    if "position" not in doc:
        raise SweepSpecError(f"{where}: sensor needs a position")
    rpy = doc.get("rpy")
    if rpy is None:
        rpy = [v * DEG for v in doc.get("rpy_deg", (0.0, 0.0, 0.0))]
    return SensorPlacement(preset=str(preset),
                           position=tuple(float(v) for v in doc["position"]),
                           rpy=tuple(float(v) for v in rpy))


def enumerate_candidates(spec: dict) -> list[PlacementCandidate]:
    """Expand a sweep spec into an ordered, de-duplicated candidate list.

    Either an explicit ``candidates`` list, or a grid: ``anchors`` (each a
    position with per-anchor orientation value lists) combined over
    ``sensor_counts`` anchor subsets. Order is lexicographic over grid
    indices, so reruns enumerate identically.
    """
    explicit = spec.get("candidates")
    default_preset = spec.get("default_preset")
    out: list[PlacementCandidate] = []
    if explicit is not None:
        for i, c in enumerate(explicit):
            sensors = tuple(_parse_sensor(s, default_preset, f"candidates[{i}]")
                            for s in c.get("sensors", []))
            out.append(PlacementCandidate(id=str(c.get("id", f"c{i:03d}")), sensors=sensors))
    else:
        anchors = spec.get("anchors")
        if not anchors:
            raise SweepSpecError("spec needs either 'candidates' or 'anchors'")
        counts = spec.get("sensor_counts", [len(anchors)])
        per_anchor: list[list[SensorPlacement]] = []
        for ai, a in enumerate(anchors):
            if "position" not in a:
                raise SweepSpecError(f"anchors[{ai}]: anchor needs a position")
            pos = tuple(float(v) for v in a["position"])
            rolls = a.get("roll_deg", [0.0])
            pitches = a.get("pitch_deg", [0.0])
            yaws = a.get("yaw_deg", [0.0])
            preset = a.get("preset", default_preset)
            if preset is None:
                raise SweepSpecError(f"anchors[{ai}]: no preset and no default_preset")
            variants = [SensorPlacement(preset=str(preset), position=pos,
                                        rpy=(r * DEG, p * DEG, y * DEG))
                        for r, p, y in itertools.product(rolls, pitches, yaws)]
            per_anchor.append(variants)
        for count in counts:
            if not (1 <= count <= len(anchors)):
                raise SweepSpecError(f"sensor count {count} impossible with {len(anchors)} anchors")
            for subset in itertools.combinations(range(len(anchors)), count):
                for combo in itertools.product(*(per_anchor[i] for i in subset)):
                    cid = "n{}_a{}_{}".format(
                        count, "-".join(str(i) for i in subset), len(out))
                    out.append(PlacementCandidate(id=cid, sensors=tuple(combo)))
    if not out:
        raise SweepSpecError("sweep spec expands to zero candidates")

    seen: dict[tuple, str] = {}
    unique: list[PlacementCandidate] = []
    for c in out:
        key = tuple(sorted((s.preset, s.position, s.rpy) for s in c.sensors))
        if key in seen:
            warnings.warn(f"candidate {c.id!r} duplicates {seen[key]!r}; dropped")
            continue
        seen[key] = c.id
        unique.append(c)
    return unique


def _check_sensor_pose(scene: Scene, placement: SensorPlacement):
    """Warn (never fail) when a sensor sits below the scene or inside geometry."""
    if scene.n_triangles == 0:
        return
    pos = np.asarray(placement.position, dtype=np.float64)
    if pos[2] < scene.bounds_min[2]:
        warnings.warn(f"sensor at {placement.position} sits below the scene's lowest geometry")
        return
    axes = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0],
                     [0, -1.0, 0], [0, 0, 1.0], [0, 0, -1.0]])
    tri, t = cast_rays(scene, np.tile(pos, (6, 1)), axes, 0.0, 0.5)
    if (tri >= 0).all():
        warnings.warn(f"sensor at {placement.position} appears to be inside geometry")


def evaluate_placement(scene: Scene, candidate: PlacementCandidate, frames: int,
                       metric_cfg: MetricConfig, seed: int,
                       distortion: DistortionConfig | None = None,
                       collect_frames: list[PointCloudFrame] | None = None) -> MetricsReport:
    """Simulate all sensors (static poses), merge world clouds, compute metrics.

    With frames > 1 the report carries the across-frame mean of both metrics
    (useful when noise/dropout is on); per-frame values are kept in extras.
    """
    if frames < 1:
        raise SweepSpecError("frames must be >= 1")
    models: list[LidarModel] = [load_lidar_preset(s.preset) for s in candidate.sensors]
    for s in candidate.sensors:
        _check_sensor_pose(scene, s)

    per_frame_reports: list[MetricsReport] = []
    sensor_point_counts = [0] * len(candidate.sensors)
    for f in range(frames):
        frame_clouds = []
        for si, (placement, model) in enumerate(zip(candidate.sensors, models)):
            traj = Trajectory.static(placement.pose())
            frame = simulate_frame(scene, model, traj, frame_index=f,
                                   options=distortion, seed=_sensor_seed(seed, si))
            sensor_point_counts[si] += len(frame)
            frame_clouds.append(frame)
            if collect_frames is not None:
                collect_frames.append(frame)
        xyz, labels, ghost, intensity = merge_world_clouds(frame_clouds)
        per_frame_reports.append(compute_metrics(
            xyz, labels, metric_cfg.lob, metric_cfg.nuc,
            nuc_label_filter=metric_cfg.nuc_label_filter,
            density_label_filter=metric_cfg.density_label_filter))

    first = per_frame_reports[0]
    if frames == 1:
        report = first
    else:
        report = MetricsReport(
            n_lob=int(round(np.mean([r.n_lob for r in per_frame_reports]))),
            area=first.area,
            infra_d=float(np.mean([r.infra_d for r in per_frame_reports])),
            infra_nuc=float(np.mean([r.infra_nuc for r in per_frame_reports])),
            nuc_avg=float(np.mean([r.nuc_avg for r in per_frame_reports])),
            disk_counts=first.disk_counts,
            disk_centers=first.disk_centers,
            n_nuc=int(round(np.mean([r.n_nuc for r in per_frame_reports]))),
            nuc_params=first.nuc_params,
            nuc_label_filter=first.nuc_label_filter,
            density_label_filter=first.density_label_filter,
            extras={"per_frame": [{"InfraD": r.infra_d, "InfraNUC": r.infra_nuc}
                                  for r in per_frame_reports]},
        )
    report.extras.update({
        "candidate_id": candidate.id,
        "frames": frames,
        "seed": seed,
        "sensor_point_counts": sensor_point_counts,
        "merged_points": int(sum(sensor_point_counts)),
    })
    return report


def rank_placements(reports: list[tuple[PlacementCandidate, MetricsReport]],
                    weights: tuple[float, float] = (1.0, 1.0)) -> list[SweepResult]:
    """Score and order candidates: normalized density minus normalized non-uniformity.

    score = w_d * InfraD / max(InfraD) - w_u * InfraNUC / max(InfraNUC);
    descending score, ties broken by candidate id ascending.
    """
    if not reports:
        raise SweepSpecError("need at least one report to rank")
    w_d, w_u = weights
    max_d = max(r.infra_d for _, r in reports)
    max_u = max(r.infra_nuc for _, r in reports)
    scored = []
    for cand, rep in reports:
        s = 0.0
        if max_d > 0:
            s += w_d * rep.infra_d / max_d
        if max_u > 0:
            s -= w_u * rep.infra_nuc / max_u
        scored.append((cand, rep, s))
    scored.sort(key=lambda item: (-item[2], item[0].id))
    return [SweepResult(candidate=c, report=r, score=s, rank=i + 1)
            for i, (c, r, s) in enumerate(scored)]


def run_sweep(scene: Scene, spec: dict, weights: tuple[float, float] = (1.0, 1.0),
              seed: int = 0, workers: int = 1) -> list[SweepResult]:
    """Evaluate every candidate in the spec and rank them.

    Candidates run as independent jobs (optionally threaded); reports are
    reassembled in candidate order before ranking, so the output does not
    depend on worker count.
    """
    candidates = enumerate_candidates(spec)
    lob = parse_lob(spec["lob"]) if "lob" in spec else None
    if lob is None:
        raise SweepSpecError("sweep spec needs a 'lob' region")
    m = spec.get("metrics", {})
    cfg = MetricConfig(
        lob=lob,
        nuc=NucParams(disks=int(m.get("disks", 100)),
                      disk_ratio=float(m.get("disk_ratio", 0.005)),
                      seed=int(m.get("seed", seed))),
        nuc_label_filter=tuple(m["nuc_labels"]) if m.get("nuc_labels") else ("road",),
        density_label_filter=tuple(m["density_labels"]) if m.get("density_labels") else None,
    )
    frames = int(spec.get("frames", 1))

    def job(c: PlacementCandidate) -> MetricsReport:
        return evaluate_placement(scene, c, frames, cfg, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(job, candidates))
    else:
        reports = [job(c) for c in candidates]
    return rank_placements(list(zip(candidates, reports)), weights)


def leaderboard_csv(results: list[SweepResult]) -> str:
    lines = ["candidate_id,InfraD,InfraNUC,score,rank"]
    for r in sorted(results, key=lambda r: r.rank):
        lines.append(f"{r.candidate.id},{r.report.infra_d:.9g},"
                     f"{r.report.infra_nuc:.9g},{r.score:.9g},{r.rank}")
    return "\n".join(lines) + "\n"


def load_sweep_spec(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise SweepSpecError("sweep spec must be a JSON object")
    return doc
