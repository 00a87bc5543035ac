"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 data/contract error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import InfralidarError
from .io_formats import (DEG, cloud_xyz_labels, frame_record_array, list_presets,
                         load_lidar_preset, load_lob_file, load_scene_file,
                         preset_doc, read_point_cloud, read_trajectory_csv,
                         write_point_cloud)
from .kernels import active_backend
from .metrics import NucParams, compute_metrics
from .motion import DistortionConfig, Pose, Trajectory
from .scene import build_scene
from .sensor import simulate_frame
from .sweep import leaderboard_csv, load_sweep_spec, run_sweep

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _pose_from_flag(text: str) -> Pose:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 6:
        raise InfralidarError("--pose needs x,y,z,roll,pitch,yaw (radians)")
    return Pose.from_rpy(vals[:3], *vals[3:])


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="simulate point-cloud frames to PCD files")
    p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--preset", required=True, help="bundled preset id or preset JSON path")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--pose", help="static pose x,y,z,roll,pitch,yaw (radians)")
    g.add_argument("--trajectory", help="trajectory CSV (t,x,y,z,roll,pitch,yaw)")
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--distortion", default="off",
                   help="'off' or the sub-frame count N (e.g. 32)")
    p.add_argument("--per-point-poses", action="store_true",
                   help="interpolate a pose per sample instead of per sub-frame")
    p.add_argument("--ghost", choices=["on", "off"], default=None,
                   help="override the preset's ghost-effect switch")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=["ascii", "binary"], default="binary")
    p.add_argument("--world", action="store_true",
                   help="write world-frame coordinates instead of sensor-frame")


def _cmd_simulate(args) -> int:
    scene = build_scene(load_scene_file(args.scene))
    lidar = load_lidar_preset(args.preset)
    if args.ghost is not None:
        from dataclasses import replace
        lidar = replace(lidar, ghost=replace(lidar.ghost, enabled=args.ghost == "on"))
    if args.trajectory:
        traj = read_trajectory_csv(args.trajectory)
    else:
        traj = Trajectory.static(_pose_from_flag(args.pose))
    if args.distortion == "off":
        options = DistortionConfig(enabled=False)
    else:
        options = DistortionConfig(enabled=True, subframes=int(args.distortion),
                                   per_point=args.per_point_poses)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"scene": args.scene, "preset": args.preset, "seed": args.seed,
            "distortion": None if not options.enabled else {
                "subframes": options.subframes, "per_point": options.per_point},
            "format": args.format, "frames": []}
    for k in range(args.frames):
        frame = simulate_frame(scene, lidar, traj, frame_index=k,
                               options=options, seed=args.seed)
        pcd_path = out / f"frame_{k:04d}.pcd"
        write_point_cloud(frame_record_array(frame, world=args.world),
                          pcd_path, mode=args.format)
        roll, pitch, yaw = frame.start_pose.to_rpy()
        meta["frames"].append({
            "index": k,
            "points": len(frame),
            "pcd": pcd_path.name,
            "start_pose": {"position": frame.start_pose.translation.tolist(),
                           "rpy": [roll, pitch, yaw]},
            "subframe_times": [t for t, _ in frame.subframe_poses],
        })
    (out / "frames_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {args.frames} frame(s) to {out}")
    return 0


def _add_metrics(sub):
    p = sub.add_parser("metrics", help="compute region density/uniformity for a cloud")
    p.add_argument("--cloud", required=True, nargs="+", help="PCD file(s), merged")
    p.add_argument("--lob", required=True, help="region-of-interest JSON")
    p.add_argument("--disks", type=int, default=100)
    p.add_argument("--disk-ratio", type=float, default=0.005)
    p.add_argument("--labels", default="road",
                   help="comma list for the uniformity label filter, or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report JSON here instead of stdout")


def _cmd_metrics(args) -> int:
    clouds = [read_point_cloud(p) for p in args.cloud]
    records = np.concatenate(clouds) if len(clouds) > 1 else clouds[0]
    xyz, labels, _ = cloud_xyz_labels(records)
    lob = load_lob_file(args.lob)
    filt = None if args.labels == "all" else tuple(s.strip() for s in args.labels.split(","))
    report = compute_metrics(xyz, labels, lob,
                             NucParams(disks=args.disks, disk_ratio=args.disk_ratio,
                                       seed=args.seed),
                             nuc_label_filter=filt)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _add_sweep(sub):
    p = sub.add_parser("sweep", help="evaluate and rank placement candidates")
    p.add_argument("--scene", required=True)
    p.add_argument("--spec", required=True, help="sweep spec JSON")
    p.add_argument("--weights", default="1,1", help="w_density,w_uniformity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)


def _cmd_sweep(args) -> int:
    scene = build_scene(load_scene_file(args.scene))
    spec = load_sweep_spec(args.spec)
    w = [float(v) for v in args.weights.split(",")]
    if len(w) != 2:
        raise InfralidarError("--weights needs two comma-separated values")
    results = run_sweep(scene, spec, weights=(w[0], w[1]), seed=args.seed,
                        workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "leaderboard.csv").write_text(leaderboard_csv(results))
    for r in results:
        (out / f"candidate_{r.candidate.id}.json").write_text(
            json.dumps(r.to_dict(), indent=2) + "\n")
    print(f"ranked {len(results)} candidates -> {out / 'leaderboard.csv'}")
    return 0


def _add_presets(sub):
    p = sub.add_parser("presets", help="list or show bundled LiDAR presets")
    p.add_argument("action", choices=["list", "show"], nargs="?", default="list")
    p.add_argument("preset_id", nargs="?")


def _cmd_presets(args) -> int:
    if args.action == "list":
        for d in list_presets():
            print(f"{d['id']:24s} {d['family']:10s} {d['name']}")
        return 0
    if not args.preset_id:
        raise InfralidarError("presets show needs a preset id")
    print(json.dumps(preset_doc(args.preset_id), indent=2))
    return 0


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the evaluation HTTP service")
    p.add_argument("--scene", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.scene)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infralidar",
                     description="LiDAR simulation and placement evaluation toolkit "
                                 f"(kernel backend: {active_backend()})")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_metrics(sub)
    _add_sweep(sub)
    _add_presets(sub)
    _add_serve(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"simulate": _cmd_simulate, "metrics": _cmd_metrics,
                "sweep": _cmd_sweep, "presets": _cmd_presets, "serve": _cmd_serve}
    try:
        return handlers[args.command](args)
    except InfralidarError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_EXIT
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
