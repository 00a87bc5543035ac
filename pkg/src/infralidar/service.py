"""HTTP evaluation service consumed by the placement explorer UI.

The scene is loaded once at startup and shared read-only; every request is
otherwise self-contained, so concurrent evaluations cannot interact. The
response always echoes the request seed. Validation failures return 400
with field-level messages; an empty region of interest returns 422.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import InfralidarError, MetricsUndefinedError
from .io_formats import list_presets, parse_scene, scene_to_dict
from .kernels import active_backend
from .metrics import InfraLob, NucParams
from .scene import BoxGeometry, GroundPlane, build_scene
from .sweep import (MetricConfig, PlacementCandidate, SensorPlacement,
                    evaluate_placement)


class SensorSpecModel(BaseModel):
    preset: str
    position: list[float] = Field(min_length=3, max_length=3)
    rpy: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)


class LobModel(BaseModel):
    center: list[float] = Field(min_length=2, max_length=2)
    half_extents: list[float] = Field(min_length=2, max_length=2)
    yaw: float = 0.0
    z_band: list[float] = Field(default=[-1.0, 1.0], min_length=2, max_length=2)


class MetricParamsModel(BaseModel):
    disks: int = 100
    disk_ratio: float = 0.005
    nuc_labels: list[str] | None = ["road"]


class EvaluateRequestModel(BaseModel):
    scene: dict | None = None  # inline scene document; None = the preloaded scene
    sensors: list[SensorSpecModel] = Field(min_length=1)
    lob: LobModel
    metrics: MetricParamsModel = MetricParamsModel()
    frames: int = 1
    seed: int = 0
    preview_target: int = 5000


def _preview_indices(n: int, target: int) -> np.ndarray:
    """Deterministic evenly-strided subsample: exactly min(n, target) indices."""
    if target <= 0 or n == 0:
        return np.empty(0, dtype=np.intp)
    if n <= target:
        return np.arange(n, dtype=np.intp)
    return np.floor(np.linspace(0, n - 1, target)).astype(np.intp)


def create_app(scene_path) -> FastAPI:
    scene_file = parse_scene(Path(scene_path).read_text(), path=str(scene_path))
    scene = build_scene(scene_file)
    app = FastAPI(title="infralidar evaluation service")
    # The explorer UI is served separately during development; the service
    # holds no credentials or state, so a permissive CORS policy is fine.
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        errors = [{"field": ".".join(str(p) for p in e["loc"] if p != "body"),
                   "message": e["msg"]} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"detail": errors})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__, "backend": active_backend()}

    @app.get("/api/presets")
    def presets():
        return {"presets": list_presets()}

    @app.get("/api/scene")
    def scene_summary():
        elements = []
        for g in scene_file.geometry:
            if isinstance(g, GroundPlane):
                elements.append({"type": "ground_plane", "material": g.material,
                                 "center": list(g.center), "size": list(g.size), "yaw": 0.0})
            elif isinstance(g, BoxGeometry):
                elements.append({"type": "box", "material": g.material,
                                 "center": list(g.center), "size": list(g.size), "yaw": g.yaw})
            else:
                elements.append({"type": "triangle", "material": g.material,
                                 "vertices": [list(v) for v in g.vertices]})
        return {
            "name": scene_file.name or Path(str(scene_path)).stem,
            "triangle_count": scene.n_triangles,
            "bounds": {"min": scene.bounds_min.tolist(), "max": scene.bounds_max.tolist()},
            "materials": scene_to_dict(scene_file)["materials"],
            "elements": elements,
        }

    @app.post("/api/evaluate")
    def evaluate(req: EvaluateRequestModel):
        t0 = time.perf_counter()
        try:
            target_scene = scene if req.scene is None else build_scene(parse_scene(req.scene))
            candidate = PlacementCandidate(
                id="ui",
                sensors=tuple(SensorPlacement(preset=s.preset,
                                              position=tuple(s.position),
                                              rpy=tuple(s.rpy))
                              for s in req.sensors))
            lob = InfraLob(center=tuple(req.lob.center),
                           half_extents=tuple(req.lob.half_extents),
                           yaw=req.lob.yaw, z_band=tuple(req.lob.z_band))
            cfg = MetricConfig(
                lob=lob,
                nuc=NucParams(disks=req.metrics.disks, disk_ratio=req.metrics.disk_ratio,
                              seed=req.seed),
                nuc_label_filter=tuple(req.metrics.nuc_labels)
                if req.metrics.nuc_labels else None)
            collected = []
            report = evaluate_placement(target_scene, candidate, req.frames, cfg,
                                        req.seed, collect_frames=collected)
        except MetricsUndefinedError as e:
            return JSONResponse(status_code=422, content={"detail": str(e)})
        except InfralidarError as e:
            return JSONResponse(status_code=400,
                                content={"detail": [{"field": "", "message": str(e)}]})

        from .sensor import merge_world_clouds
        xyz, labels, ghost, intensity = merge_world_clouds(collected)
        idx = _preview_indices(xyz.shape[0], req.preview_target)
        poses = []
        for s, frame in zip(req.sensors, collected[:len(req.sensors)]):
            roll, pitch, yaw = frame.start_pose.to_rpy()
            poses.append({"preset": s.preset,
                          "position": frame.start_pose.translation.tolist(),
                          "rpy": [roll, pitch, yaw]})
        return {
            "seed": req.seed,
            "report": report.to_dict(),
            "preview": {
                "count": int(idx.shape[0]),
                "total_points": int(xyz.shape[0]),
                "points": xyz[idx].round(4).tolist(),
                "labels": labels[idx].tolist(),
                "ghost": ghost[idx].astype(int).tolist(),
                "intensity": intensity[idx].round(4).tolist(),
            },
            "poses": poses,
            "timing_ms": round((time.perf_counter() - t0) * 1000.0, 3),
        }

    return app


def load_app(scene: str | None = None) -> FastAPI:
    """uvicorn factory hook: ``uvicorn 'infralidar.service:load_app' --factory``."""
    import os
    path = scene or os.environ.get("INFRALIDAR_SCENE")
    if not path:
        raise InfralidarError("set INFRALIDAR_SCENE or pass a scene path")
    return create_app(path)
