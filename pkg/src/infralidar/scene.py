"""Static scene geometry with materials and ray queries.

A scene is an immutable triangle soup with per-surface material data and a
BVH for ray queries. Boxes and ground planes are tessellated to triangles at
build time so there is a single intersection code path. Back-face hits are
reported with the normal flipped to oppose the ray, since real LiDAR sees
thin geometry from both sides.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bvh import Bvh, build_bvh
from .errors import ContractViolationError, SceneBuildError
from .kernels import bvh_cast

_DEGENERATE_AREA = 1e-14  # m^2; triangles below this are rejected at build


class Label(enum.IntEnum):
    """Semantic surface labels carried onto simulated points."""

    ROAD = 0
    BUILDING = 1
    GLASS = 2
    WATER = 3
    VEGETATION = 4
    VEHICLE = 5
    OTHER = 6

    @classmethod
    def from_name(cls, name: str) -> "Label":
        try:
            return cls[name.upper()]
        except KeyError:
            raise SceneBuildError(f"unknown semantic label {name!r}; "
                                  f"expected one of {[l.name.lower() for l in cls]}") from None


@dataclass(frozen=True)
class MaterialSurface:
    """Material attached to scene surfaces. Smoothness/reflectivity clamp to [0, 1]."""

    smoothness: float
    reflectivity: float
    label: Label
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "smoothness", float(min(1.0, max(0.0, self.smoothness))))
        object.__setattr__(self, "reflectivity", float(min(1.0, max(0.0, self.reflectivity))))
        object.__setattr__(self, "label", Label(self.label))


# --- scene description (parsed scene file, build input) ---------------------


@dataclass(frozen=True)
class GroundPlane:
    """Horizontal rectangle at z = center[2], extents size = (sx, sy)."""

    material: str
    center: tuple[float, float, float]
    size: tuple[float, float]


@dataclass(frozen=True)
class BoxGeometry:
    """Box with full extents ``size``, rotated by ``yaw`` about +z."""

    material: str
    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float = 0.0


@dataclass(frozen=True)
class TriangleGeometry:
    material: str
    vertices: tuple[tuple[float, float, float], ...]  # exactly 3


GeometryEntry = GroundPlane | BoxGeometry | TriangleGeometry


@dataclass(frozen=True)
class SceneFile:
    """Parsed scene description: named materials plus geometry referencing them."""

    materials: tuple[MaterialSurface, ...]
    geometry: tuple[GeometryEntry, ...] = ()
    name: str = ""


@dataclass(frozen=True)
class Hit:
    """Nearest ray-scene intersection."""

    distance: float  # m, > 0
    position: np.ndarray  # (3,) world m
    normal: np.ndarray  # (3,) unit, opposes the ray direction
    surface_id: int


@dataclass(frozen=True)
class Scene:
    """Immutable triangle scene with a spatial index. Safe for concurrent queries."""

    tri_v0: np.ndarray  # (n, 3)
    tri_e1: np.ndarray  # (n, 3) v1 - v0
    tri_e2: np.ndarray  # (n, 3) v2 - v0
    tri_normal: np.ndarray  # (n, 3) unit geometric normals
    tri_surface: np.ndarray  # (n,) int32 surface ids
    surfaces: tuple[MaterialSurface, ...]
    accel: Bvh
    bounds_min: np.ndarray  # (3,)
    bounds_max: np.ndarray  # (3,)
    name: str = ""
    # Per-surface lookup tables for vectorized hit shading.
    surface_smoothness: np.ndarray = field(default=None, repr=False)
    surface_reflectivity: np.ndarray = field(default=None, repr=False)
    surface_label: np.ndarray = field(default=None, repr=False)

    @property
    def n_triangles(self) -> int:
        return self.tri_v0.shape[0]


def _tessellate(entry: GeometryEntry, index: int) -> np.ndarray:
    """Lower one geometry entry to an (k, 3, 3) vertex array."""
    if isinstance(entry, TriangleGeometry):
        v = np.asarray(entry.vertices, dtype=np.float64)
        if v.shape != (3, 3):
            raise SceneBuildError(f"geometry[{index}]: triangle needs exactly 3 vertices")
        return v[None, :, :]
    if isinstance(entry, GroundPlane):
        cx, cy, cz = entry.center
        hx, hy = entry.size[0] / 2.0, entry.size[1] / 2.0
        c = [(cx - hx, cy - hy, cz), (cx + hx, cy - hy, cz),
             (cx + hx, cy + hy, cz), (cx - hx, cy + hy, cz)]
        return np.asarray([[c[0], c[1], c[2]], [c[0], c[2], c[3]]], dtype=np.float64)
    if isinstance(entry, BoxGeometry):
        hx, hy, hz = (s / 2.0 for s in entry.size)
        corners = np.array([[sx * hx, sy * hy, sz * hz]
                            for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)])
        cy, sy_ = np.cos(entry.yaw), np.sin(entry.yaw)
        rot = np.array([[cy, -sy_, 0.0], [sy_, cy, 0.0], [0.0, 0.0, 1.0]])
        corners = corners @ rot.T + np.asarray(entry.center)
        # Corner order: index bit pattern (x, y, z); two triangles per face,
        # wound so geometric normals point outward.
        faces = [
            (0, 1, 3, 2),  # -x
            (4, 6, 7, 5),  # +x
            (0, 4, 5, 1),  # -y
            (2, 3, 7, 6),  # +y
            (0, 2, 6, 4),  # -z
            (1, 5, 7, 3),  # +z
        ]
        tris = []
        for a, b, c, d in faces:
            tris.append([corners[a], corners[b], corners[c]])
            tris.append([corners[a], corners[c], corners[d]])
        return np.asarray(tris, dtype=np.float64)
    raise SceneBuildError(f"geometry[{index}]: unsupported entry type {type(entry).__name__}")


def build_scene(description: SceneFile) -> Scene:
    """Build a queryable scene; primitives are expanded to triangles here.

    Raises SceneBuildError for dangling material references and degenerate
    (zero-area) triangles, reporting the offending geometry index.
    """
    mat_index = {m.name: i for i, m in enumerate(description.materials)}
    vertex_blocks: list[np.ndarray] = []
    surface_blocks: list[np.ndarray] = []
    for i, entry in enumerate(description.geometry):
        if entry.material not in mat_index:
            raise SceneBuildError(f"geometry[{i}]: unknown material {entry.material!r}")
        verts = _tessellate(entry, i)
        if not np.isfinite(verts).all():
            raise SceneBuildError(f"geometry[{i}]: non-finite vertex coordinates")
        vertex_blocks.append(verts)
        surface_blocks.append(np.full(verts.shape[0], mat_index[entry.material], dtype=np.int32))

    if vertex_blocks:
        verts = np.concatenate(vertex_blocks, axis=0)
        surface = np.concatenate(surface_blocks, axis=0)
    else:
        verts = np.empty((0, 3, 3), dtype=np.float64)
        surface = np.empty(0, dtype=np.int32)

    v0 = np.ascontiguousarray(verts[:, 0, :])
    e1 = np.ascontiguousarray(verts[:, 1, :] - verts[:, 0, :])
    e2 = np.ascontiguousarray(verts[:, 2, :] - verts[:, 0, :])
    cross = np.cross(e1, e2)
    area2 = np.linalg.norm(cross, axis=1)
    bad = np.nonzero(area2 < 2.0 * _DEGENERATE_AREA)[0]
    if bad.size:
        raise SceneBuildError(f"degenerate zero-area triangle at index {int(bad[0])}")
    normal = cross / area2[:, None] if len(area2) else cross

    if verts.shape[0]:
        tmin = verts.min(axis=1)
        tmax = verts.max(axis=1)
        bounds_min = tmin.min(axis=0)
        bounds_max = tmax.max(axis=0)
        accel = build_bvh(verts.mean(axis=1), tmin, tmax)
    else:
        bounds_min = np.full(3, np.inf)
        bounds_max = np.full(3, -np.inf)
        accel = build_bvh(np.empty((0, 3)), np.empty((0, 3)), np.empty((0, 3)))

    smooth = np.asarray([m.smoothness for m in description.materials], dtype=np.float64)
    refl = np.asarray([m.reflectivity for m in description.materials], dtype=np.float64)
    labels = np.asarray([int(m.label) for m in description.materials], dtype=np.int32)

    arrays = dict(tri_v0=v0, tri_e1=e1, tri_e2=e2,
                  tri_normal=np.ascontiguousarray(normal),
                  tri_surface=surface,
                  bounds_min=bounds_min, bounds_max=bounds_max,
                  surface_smoothness=smooth, surface_reflectivity=refl,
                  surface_label=labels)
    for a in arrays.values():
        a.setflags(write=False)
    return Scene(surfaces=tuple(description.materials), accel=accel,
                 name=description.name, **arrays)


def scene_from_triangles(vertices: np.ndarray, surface_ids: np.ndarray,
                         materials: list[MaterialSurface], name: str = "") -> Scene:
    """Build a scene directly from an (n, 3, 3) vertex array (tests, tools)."""
    entries = tuple(
        TriangleGeometry(material=materials[s].name, vertices=tuple(map(tuple, tri)))
        for tri, s in zip(np.asarray(vertices, dtype=np.float64), surface_ids)
    )
    return build_scene(SceneFile(materials=tuple(materials), geometry=entries, name=name))


def cast_rays(scene: Scene, origins: np.ndarray, directions: np.ndarray,
              t_min: float = 0.0, t_max: float = np.inf):
    """Batch nearest-hit query; returns raw ``(tri, t)`` arrays.

    ``tri`` holds original triangle indices (-1 for misses). Directions must
    be unit-length within 1e-9.
    """
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    directions = np.ascontiguousarray(directions, dtype=np.float64)
    if origins.ndim != 2 or origins.shape[1] != 3 or origins.shape != directions.shape:
        raise ContractViolationError("origins/directions must both have shape (n, 3)")
    norms = np.linalg.norm(directions, axis=1)
    if directions.shape[0] and np.abs(norms - 1.0).max() > 1e-9:
        raise ContractViolationError("ray directions must be unit-length within 1e-9")
    if not (0.0 <= t_min < t_max):
        raise ContractViolationError(f"need 0 <= t_min < t_max, got [{t_min}, {t_max}]")
    b = scene.accel
    return bvh_cast(b.node_min, b.node_max, b.node_left, b.node_right,
                    b.node_start, b.node_count, b.order,
                    scene.tri_v0, scene.tri_e1, scene.tri_e2,
                    origins, directions, float(t_min), float(t_max))


def hit_from_cast(scene: Scene, origin: np.ndarray, direction: np.ndarray,
                  tri: int, t: float) -> Hit:
    """Assemble a Hit record from raw kernel output."""
    position = origin + t * direction
    normal = scene.tri_normal[tri]
    if float(normal @ direction) > 0.0:
        normal = -normal
    return Hit(distance=float(t), position=position, normal=normal,
               surface_id=int(scene.tri_surface[tri]))


def cast_ray(scene: Scene, origin: np.ndarray, direction: np.ndarray,
             t_min: float = 0.0, t_max: float = np.inf) -> Hit | None:
    """Nearest intersection with distance in (t_min, t_max], or None."""
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    tri, t = cast_rays(scene, origin[None, :], direction[None, :], t_min, t_max)
    if tri[0] < 0:
        return None
    return hit_from_cast(scene, origin, direction, int(tri[0]), float(t[0]))
