import numpy as np
import pytest

from infralidar.scene import (BoxGeometry, GroundPlane, Label, MaterialSurface,
                              SceneFile, TriangleGeometry, build_scene)

sys_path_helper = None  # tests import oracles via rootdir conftest placement


def random_triangle_soup(rng: np.random.Generator, n: int, extent: float = 50.0,
                         tri_size: float = 4.0) -> np.ndarray:
    """(n, 3, 3) random triangles: anchored corners plus bounded edge jitter."""
    anchor = rng.uniform(-extent, extent, size=(n, 1, 3))
    jitter = rng.uniform(-tri_size, tri_size, size=(n, 3, 3))
    jitter[:, 0, :] = 0.0
    return anchor + jitter


def make_materials():
    return [
        MaterialSurface(0.2, 0.40, Label.ROAD, "asphalt"),
        MaterialSurface(0.4, 0.55, Label.BUILDING, "brick"),
        MaterialSurface(0.95, 0.30, Label.GLASS, "glass"),
        MaterialSurface(0.3, 0.60, Label.VEHICLE, "paint"),
    ]


def random_scene(seed: int, n_triangles: int):
    from infralidar.scene import scene_from_triangles
    rng = np.random.default_rng(seed)
    verts = random_triangle_soup(rng, n_triangles)
    mats = make_materials()
    surf = rng.integers(0, len(mats), size=n_triangles)
    return scene_from_triangles(verts, surf, mats), verts


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


@pytest.fixture
def ground_scene():
    """200 x 200 m road plane at z = 0."""
    mats = (MaterialSurface(0.2, 0.4, Label.ROAD, "asphalt"),)
    return build_scene(SceneFile(materials=mats,
                                 geometry=(GroundPlane("asphalt", (0, 0, 0), (200, 200)),)))


@pytest.fixture
def box_scene():
    """Closed 20 m box around the origin (sensor inside sees every beam return)."""
    mats = (MaterialSurface(0.2, 0.5, Label.BUILDING, "wall"),)
    return build_scene(SceneFile(materials=mats,
                                 geometry=(BoxGeometry("wall", (0, 0, 0), (20, 20, 20)),)))


@pytest.fixture
def empty_scene():
    return build_scene(SceneFile(materials=(), geometry=()))


def mirror_corridor_scene(glossy_smoothness: float = 0.95):
    """Glossy 45-degree wall at x=5 redirecting +x rays to +y, diffuse wall at y=3.

    A beam from the origin along +x hits the glossy plane at (5, 0, 0)
    (a = 5), reflects to +y, and meets the diffuse wall after b = 3 m.
    """
    mats = (
        MaterialSurface(glossy_smoothness, 0.3, Label.GLASS, "mirror"),
        MaterialSurface(0.2, 0.6, Label.BUILDING, "target"),
    )
    # Glossy plane through (5, 0, 0), normal (-1, 1, 0)/sqrt(2), spanning z and the
    # (1, 1, 0) diagonal; large enough to catch every test beam.
    span = 40.0
    u = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)
    w = np.array([0.0, 0.0, 1.0])
    p0 = np.array([5.0, 0.0, 0.0])
    c = [p0 - span * u - span * w, p0 + span * u - span * w,
         p0 + span * u + span * w, p0 - span * u + span * w]
    glossy = [TriangleGeometry("mirror", (tuple(c[0]), tuple(c[1]), tuple(c[2]))),
              TriangleGeometry("mirror", (tuple(c[0]), tuple(c[2]), tuple(c[3])))]
    # Diffuse wall: plane y = 3 covering x in [-60, 60], z in [-40, 40].
    d = [(-60.0, 3.0, -40.0), (60.0, 3.0, -40.0), (60.0, 3.0, 40.0), (-60.0, 3.0, 40.0)]
    diffuse = [TriangleGeometry("target", (d[0], d[1], d[2])),
               TriangleGeometry("target", (d[0], d[2], d[3]))]
    return build_scene(SceneFile(materials=mats, geometry=tuple(glossy + diffuse)))


@pytest.fixture
def mirror_scene():
    return mirror_corridor_scene()
