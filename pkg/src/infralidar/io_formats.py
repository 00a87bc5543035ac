"""Parsers and writers for every external artifact.

JSON for scenes, presets, regions, sweep specs and reports; CSV for
trajectories and pattern tables; PCD v0.7 for point clouds. Parsers reject
missing required fields instead of defaulting, and every writer/reader pair
round-trips losslessly at its declared precision.
"""

from __future__ import annotations

import json
import struct
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, PresetError
from .ghost import GhostConfig
from .metrics import InfraLob, NucParams
from .motion import Pose, Trajectory
from .patterns import Pattern, PatternConfig, load_pattern_table
from .scene import (BoxGeometry, GroundPlane, Label, MaterialSurface, SceneFile,
                    TriangleGeometry)
from .sensor import LidarModel

PCD_FIELDS = ("x", "y", "z", "intensity", "timestamp", "label", "ghost", "channel")
_PCD_STRUCT = struct.Struct("<fffffiii")

DEG = np.pi / 180.0


# --- scene files -------------------------------------------------------------


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ParseError(f"missing required field {key!r}", location=where)
    return obj[key]


def parse_scene(text_or_dict, path: str | None = None) -> SceneFile:
    """Parse a scene JSON document into a SceneFile (strict, no defaults)."""
    if isinstance(text_or_dict, (str, bytes)):
        try:
            doc = json.loads(text_or_dict)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", path=path,
                             location=f"line {e.lineno} column {e.colno}") from None
    else:
        doc = text_or_dict
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object", path=path)

    materials = []
    for i, m in enumerate(_require(doc, "materials", "scene")):
        where = f"materials[{i}]"
        materials.append(MaterialSurface(
            smoothness=float(_require(m, "smoothness", where)),
            reflectivity=float(_require(m, "reflectivity", where)),
            label=Label.from_name(str(_require(m, "label", where))),
            name=str(_require(m, "name", where)),
        ))
    names = [m.name for m in materials]
    if len(set(names)) != len(names):
        raise ParseError("duplicate material names", path=path, location="materials")
    known = set(names)

    geometry: list = []
    for i, g in enumerate(doc.get("geometry", [])):
        where = f"geometry[{i}]"
        kind = str(_require(g, "type", where))
        material = str(_require(g, "material", where))
        if material not in known:
            raise ParseError(f"unknown material {material!r}", path=path, location=where)
        try:
            if kind == "ground_plane":
                geometry.append(GroundPlane(
                    material=material,
                    center=tuple(float(v) for v in _require(g, "center", where)),
                    size=tuple(float(v) for v in _require(g, "size", where))[:2]))
            elif kind == "box":
                geometry.append(BoxGeometry(
                    material=material,
                    center=tuple(float(v) for v in _require(g, "center", where)),
                    size=tuple(float(v) for v in _require(g, "size", where)),
                    yaw=float(g.get("yaw", 0.0))))
            elif kind == "triangle":
                verts = _require(g, "vertices", where)
                geometry.append(TriangleGeometry(
                    material=material,
                    vertices=tuple(tuple(float(v) for v in vert) for vert in verts)))
            else:
                raise ParseError(f"unknown geometry type {kind!r}", path=path, location=where)
        except (TypeError, ValueError) as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"malformed numbers: {e}", path=path, location=where) from None

    return SceneFile(materials=tuple(materials), geometry=tuple(geometry),
                     name=str(doc.get("name", "")))


def scene_to_dict(scene_file: SceneFile) -> dict:
    geometry = []
    for g in scene_file.geometry:
        if isinstance(g, GroundPlane):
            geometry.append({"type": "ground_plane", "material": g.material,
                             "center": list(g.center), "size": list(g.size)})
        elif isinstance(g, BoxGeometry):
            geometry.append({"type": "box", "material": g.material,
                             "center": list(g.center), "size": list(g.size), "yaw": g.yaw})
        else:
            geometry.append({"type": "triangle", "material": g.material,
                             "vertices": [list(v) for v in g.vertices]})
    doc = {
        "materials": [{"name": m.name, "smoothness": m.smoothness,
                       "reflectivity": m.reflectivity, "label": m.label.name.lower()}
                      for m in scene_file.materials],
        "geometry": geometry,
    }
    if scene_file.name:
        doc["name"] = scene_file.name
    return doc


def load_scene_file(path) -> SceneFile:
    return parse_scene(Path(path).read_text(), path=str(path))


def save_scene_file(scene_file: SceneFile, path):
    Path(path).write_text(json.dumps(scene_to_dict(scene_file), indent=2) + "\n")


# --- point clouds (PCD v0.7) -------------------------------------------------


def _pcd_header(n: int, mode: str) -> str:
    return "\n".join([
        "# .PCD v0.7 - Point Cloud Data file format",
        "VERSION 0.7",
        "FIELDS " + " ".join(PCD_FIELDS),
        "SIZE 4 4 4 4 4 4 4 4",
        "TYPE F F F F F I I I",
        "COUNT 1 1 1 1 1 1 1 1",
        f"WIDTH {n}",
        "HEIGHT 1",
        "VIEWPOINT 0 0 0 1 0 0 0",
        f"POINTS {n}",
        f"DATA {mode}",
    ]) + "\n"


def cloud_record_array(positions, intensity, timestamps, labels, is_ghost, channels):
    """Pack parallel arrays into the PCD record dtype (float32/int32)."""
    n = len(positions)
    rec = np.zeros(n, dtype=[(f, "<f4") for f in PCD_FIELDS[:5]] +
                             [(f, "<i4") for f in PCD_FIELDS[5:]])
    pos = np.asarray(positions, dtype=np.float32).reshape(n, 3)
    rec["x"], rec["y"], rec["z"] = pos[:, 0], pos[:, 1], pos[:, 2]
    rec["intensity"] = np.asarray(intensity, dtype=np.float32)
    rec["timestamp"] = np.asarray(timestamps, dtype=np.float32)
    rec["label"] = np.asarray(labels, dtype=np.int32)
    rec["ghost"] = np.asarray(is_ghost, dtype=np.int32)
    rec["channel"] = np.asarray(channels, dtype=np.int32)
    return rec


def frame_record_array(frame, world: bool = False):
    """Record array for a PointCloudFrame, optionally world-projected."""
    pos = frame.world_points() if world else frame.positions
    return cloud_record_array(pos, frame.intensity, frame.timestamps,
                              frame.labels, frame.is_ghost, frame.channels)


def write_point_cloud(records: np.ndarray, path, mode: str = "binary"):
    """Write a PCD v0.7 file from a record array (see cloud_record_array)."""
    if mode not in ("ascii", "binary"):
        raise ParseError(f"unsupported PCD mode {mode!r}")
    n = records.shape[0]
    with open(path, "wb") as f:
        f.write(_pcd_header(n, mode).encode("ascii"))
        if mode == "binary":
            f.write(records.tobytes())
        else:
            for r in records:
                f.write(("%.9g %.9g %.9g %.9g %.9g %d %d %d\n" % tuple(
                    r[name] for name in PCD_FIELDS)).encode("ascii"))


def read_point_cloud(path) -> np.ndarray:
    """Read a PCD file written by this package; returns the record array."""
    with open(path, "rb") as f:
        raw = f.read()
    header_lines = []
    offset = 0
    while True:
        nl = raw.find(b"\n", offset)
        if nl < 0:
            raise ParseError("truncated PCD header", path=str(path))
        line = raw[offset:nl].decode("ascii", errors="replace")
        offset = nl + 1
        if not line.startswith("#"):
            header_lines.append(line)
        if line.startswith("DATA"):
            break
    meta = {}
    for line in header_lines:
        parts = line.split()
        if parts:
            meta[parts[0]] = parts[1:]
    for key in ("FIELDS", "POINTS", "DATA", "TYPE", "SIZE"):
        if key not in meta:
            raise ParseError(f"PCD header missing {key}", path=str(path))
    if tuple(meta["FIELDS"]) != PCD_FIELDS:
        raise ParseError(f"unsupported PCD fields {meta['FIELDS']}", path=str(path))
    n = int(meta["POINTS"][0])
    mode = meta["DATA"][0]
    dtype = np.dtype([(f, "<f4") for f in PCD_FIELDS[:5]] +
                     [(f, "<i4") for f in PCD_FIELDS[5:]])
    if mode == "binary":
        payload = raw[offset:offset + n * dtype.itemsize]
        if len(payload) < n * dtype.itemsize:
            raise ParseError(f"truncated PCD payload: expected {n} records", path=str(path))
        return np.frombuffer(payload, dtype=dtype).copy()
    if mode == "ascii":
        rec = np.zeros(n, dtype=dtype)
        lines = raw[offset:].decode("ascii").splitlines()
        if len(lines) < n:
            raise ParseError(f"truncated PCD payload: expected {n} records", path=str(path))
        for i in range(n):
            parts = lines[i].split()
            if len(parts) != len(PCD_FIELDS):
                raise ParseError(f"malformed PCD record on line {i}", path=str(path))
            for name, val in zip(PCD_FIELDS, parts):
                rec[name][i] = float(val) if rec.dtype[name].kind == "f" else int(val)
        return rec
    raise ParseError(f"unsupported PCD data mode {mode!r}", path=str(path))


def cloud_xyz_labels(records: np.ndarray):
    """Convenience accessors for metric computation."""
    xyz = np.stack([records["x"], records["y"], records["z"]], axis=1).astype(np.float64)
    return xyz, records["label"].astype(np.int32), records["ghost"].astype(bool)


# --- trajectories ------------------------------------------------------------

TRAJECTORY_HEADER = "t,x,y,z,roll,pitch,yaw"


def read_trajectory_csv(path) -> Trajectory:
    """CSV with header t,x,y,z,roll,pitch,yaw (radians, ZYX intrinsic)."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != TRAJECTORY_HEADER:
        raise ParseError(f"trajectory header must be {TRAJECTORY_HEADER!r}", path=str(path))
    keyframes = []
    for i, ln in enumerate(lines[1:], start=2):
        vals = [float(v) for v in ln.split(",")]
        if len(vals) != 7:
            raise ParseError("trajectory rows need 7 columns", path=str(path),
                             location=f"line {i}")
        t, x, y, z, roll, pitch, yaw = vals
        keyframes.append((t, Pose.from_rpy((x, y, z), roll, pitch, yaw)))
    return Trajectory.from_keyframes(keyframes)


def write_trajectory_csv(trajectory: Trajectory, path):
    rows = [TRAJECTORY_HEADER]
    for t, pose in zip(trajectory.times, trajectory.poses):
        roll, pitch, yaw = pose.to_rpy()
        x, y, z = pose.translation
        rows.append(f"{t:.9g},{x:.9g},{y:.9g},{z:.9g},{roll:.9g},{pitch:.9g},{yaw:.9g}")
    Path(path).write_text("\n".join(rows) + "\n")


# --- pattern tables ----------------------------------------------------------

PATTERN_HEADER = "t,azimuth_rad,elevation_rad,channel"


def read_pattern_csv(path, frame_period: float | None = None) -> Pattern:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != PATTERN_HEADER:
        raise ParseError(f"pattern header must be {PATTERN_HEADER!r}", path=str(path))
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        vals = [float(v) for v in ln.split(",")]
        if len(vals) != 4:
            raise ParseError("pattern rows need 4 columns", path=str(path), location=f"line {i}")
        rows.append(vals)
    return load_pattern_table(np.asarray(rows, dtype=np.float64).reshape(-1, 4), frame_period)


def write_pattern_csv(pattern: Pattern, path):
    rows = [PATTERN_HEADER]
    for i in range(len(pattern)):
        rows.append(f"{pattern.t_offset[i]:.12g},{pattern.azimuth[i]:.12g},"
                    f"{pattern.elevation[i]:.12g},{int(pattern.channel[i])}")
    Path(path).write_text("\n".join(rows) + "\n")


# --- region of interest ------------------------------------------------------


def parse_lob(doc_or_text, path: str | None = None) -> InfraLob:
    doc = json.loads(doc_or_text) if isinstance(doc_or_text, (str, bytes)) else doc_or_text
    return InfraLob(
        center=tuple(float(v) for v in _require(doc, "center", "lob")),
        half_extents=tuple(float(v) for v in _require(doc, "half_extents", "lob")),
        yaw=float(doc.get("yaw", 0.0)),
        z_band=tuple(float(v) for v in _require(doc, "z_band", "lob")),
    )


def lob_to_dict(lob: InfraLob) -> dict:
    return {"center": list(lob.center), "half_extents": list(lob.half_extents),
            "yaw": lob.yaw, "z_band": list(lob.z_band)}


def load_lob_file(path) -> InfraLob:
    return parse_lob(Path(path).read_text(), path=str(path))


# --- LiDAR presets -----------------------------------------------------------
# Preset datasheet fields use degrees with explicit _deg suffixes; everything
# is converted to radians here. Preset parameters are implementer-sourced
# from public datasheets: convenient starting points, not measured truth.


def _pattern_config_from_preset(doc: dict, where: str) -> PatternConfig:
    family = str(_require(doc, "family", where))
    if family == "surround":
        pps = float(_require(doc, "points_per_second", where))
        rot = float(_require(doc, "rotation_frequency_hz", where))
        if "elevation_table_deg" in doc:
            table = np.asarray(doc["elevation_table_deg"], dtype=np.float64) * DEG
            return PatternConfig("surround_nonuniform", {
                "elevation_table": table.tolist(),
                "points_per_second": pps, "rotation_frequency": rot})
        return PatternConfig("surround_uniform", {
            "channels": int(_require(doc, "channels", where)),
            "fov_upper": float(_require(doc, "fov_upper_deg", where)) * DEG,
            "fov_lower": float(_require(doc, "fov_lower_deg", where)) * DEG,
            "points_per_second": pps, "rotation_frequency": rot})
    if family == "mems":
        return PatternConfig("mems_lissajous", {
            "az_amplitude": float(_require(doc, "az_amplitude_deg", where)) * DEG,
            "el_amplitude": float(_require(doc, "el_amplitude_deg", where)) * DEG,
            "f_x": float(_require(doc, "f_x_hz", where)),
            "f_y": float(_require(doc, "f_y_hz", where)),
            "phase": float(doc.get("phase_deg", 90.0)) * DEG,
            "points_per_second": float(_require(doc, "points_per_second", where)),
            "frame_rate": float(_require(doc, "frame_rate_hz", where))})
    if family == "risley":
        return PatternConfig("risley", {
            "w1": 2.0 * np.pi * float(_require(doc, "prism1_rate_hz", where)),
            "w2": 2.0 * np.pi * float(_require(doc, "prism2_rate_hz", where)),
            "d1": float(_require(doc, "d1_deg", where)) * DEG,
            "d2": float(_require(doc, "d2_deg", where)) * DEG,
            "phase1": float(doc.get("phase1_deg", 0.0)) * DEG,
            "phase2": float(doc.get("phase2_deg", 0.0)) * DEG,
            "points_per_second": float(_require(doc, "points_per_second", where)),
            "frame_rate": float(_require(doc, "frame_rate_hz", where))})
    raise PresetError(f"unknown preset family {family!r}")


def _lidar_model_from_doc(doc: dict, where: str) -> LidarModel:
    ghost_doc = doc.get("ghost", {})
    return LidarModel(
        pattern=_pattern_config_from_preset(doc, where),
        range_min=float(_require(doc, "range_min_m", where)),
        range_max=float(_require(doc, "range_max_m", where)),
        range_noise_sigma=float(doc.get("range_noise_sigma_m", 0.0)),
        dropout_probability=float(doc.get("dropout_probability", 0.0)),
        ghost=GhostConfig(
            enabled=bool(ghost_doc.get("enabled", False)),
            smoothness_threshold=float(ghost_doc.get("smoothness_threshold", 0.9)),
            trigger_ratio=float(ghost_doc.get("trigger_ratio", 0.5))),
        name=str(_require(doc, "name", where)),
    )


def list_presets() -> list[dict]:
    """Bundled preset catalog: [{id, family, ...summary}] sorted by id."""
    out = []
    for entry in resources.files("infralidar.presets").iterdir():
        if entry.name.endswith(".json"):
            doc = json.loads(entry.read_text())
            out.append({"id": entry.name[:-5], "name": doc.get("name"),
                        "family": doc.get("family")})
    return sorted(out, key=lambda d: d["id"])


def load_lidar_preset(name_or_path) -> LidarModel:
    """Load a bundled preset by id, or any preset JSON by path."""
    p = Path(str(name_or_path))
    if p.suffix == ".json" and p.exists():
        try:
            return _lidar_model_from_doc(json.loads(p.read_text()), str(p))
        except ParseError as e:
            raise PresetError(str(e)) from None
    ref = resources.files("infralidar.presets") / f"{name_or_path}.json"
    if not ref.is_file():
        known = ", ".join(d["id"] for d in list_presets())
        raise PresetError(f"unknown preset {name_or_path!r}; bundled presets: {known}")
    try:
        return _lidar_model_from_doc(json.loads(ref.read_text()), str(name_or_path))
    except ParseError as e:
        raise PresetError(str(e)) from None


def preset_doc(name_or_path) -> dict:
    """Raw preset JSON document (for display/round-trips)."""
    p = Path(str(name_or_path))
    if p.suffix == ".json" and p.exists():
        return json.loads(p.read_text())
    ref = resources.files("infralidar.presets") / f"{name_or_path}.json"
    if not ref.is_file():
        raise PresetError(f"unknown preset {name_or_path!r}")
    return json.loads(ref.read_text())
