"""LiDAR point-cloud simulation and infrastructure placement evaluation."""

__version__ = "0.1.0"

from .ghost import GhostConfig, GhostKind, GhostOutcome, resolve_hit
from .kernels import active_backend
from .metrics import (InfraLob, MetricsReport, NucParams, compute_metrics,
                      infra_density, infra_nuc, points_in_lob, sample_disk_centers)
from .motion import (DistortionConfig, Pose, Trajectory, accumulate_frame,
                     partition_subframes, pose_at)
from .patterns import (BeamSample, Pattern, PatternConfig, generate_pattern,
                       load_pattern_table, mems_lissajous_pattern, risley_pattern,
                       surround_nonuniform_pattern, surround_uniform_pattern)
from .scene import (Hit, Label, MaterialSurface, Scene, SceneFile, build_scene,
                    cast_ray, cast_rays)
from .sensor import (LidarModel, LidarPoint, PointCloudFrame, apply_range_model,
                     merge_world_clouds, simulate_frame)
from .sweep import (MetricConfig, PlacementCandidate, SensorPlacement, SweepResult,
                    enumerate_candidates, evaluate_placement, rank_placements,
                    run_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
