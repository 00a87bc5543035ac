import numpy as np
import pytest

from infralidar.ghost import (GhostConfig, GhostKind, GhostOutcome, resolve_batch,
                              resolve_hit)
from infralidar.scene import Label, cast_ray, cast_rays

from conftest import mirror_corridor_scene


def first_hit(scene, origin, direction):
    hit = cast_ray(scene, origin, direction)
    assert hit is not None
    return hit


class TestResolveHit:
    def test_dull_surface_returns_real(self, mirror_scene):
        cfg = GhostConfig(enabled=True, smoothness_threshold=0.8, trigger_ratio=1.0)
        dull = mirror_corridor_scene(glossy_smoothness=0.2)
        origin, d = np.zeros(3), np.array([1.0, 0.0, 0.0])
        out = resolve_hit(dull, origin, d, first_hit(dull, origin, d), cfg,
                          np.random.default_rng(0))
        assert out.kind is GhostKind.REAL
        assert out.a == pytest.approx(5.0, abs=1e-12)

    def test_disabled_returns_real(self, mirror_scene):
        cfg = GhostConfig(enabled=False)
        origin, d = np.zeros(3), np.array([1.0, 0.0, 0.0])
        out = resolve_hit(mirror_scene, origin, d, first_hit(mirror_scene, origin, d),
                          cfg, np.random.default_rng(0))
        assert out.kind is GhostKind.REAL

    def test_ghost_at_a_plus_b(self, mirror_scene):
        cfg = GhostConfig(enabled=True, smoothness_threshold=0.9, trigger_ratio=1.0)
        origin, d = np.zeros(3), np.array([1.0, 0.0, 0.0])
        out = resolve_hit(mirror_scene, origin, d, first_hit(mirror_scene, origin, d),
                          cfg, np.random.default_rng(0))
        assert out.kind is GhostKind.GHOST
        assert out.a == pytest.approx(5.0, abs=1e-9)
        assert out.b == pytest.approx(3.0, abs=1e-6)
        np.testing.assert_allclose(out.position, [8.0, 0.0, 0.0], atol=1e-9)
        assert out.label == Label.BUILDING  # carries the secondary object's label
        assert out.reflectivity == pytest.approx(0.6)

    def test_ghost_position_is_mirror_of_secondary_hit(self, mirror_scene):
        cfg = GhostConfig(enabled=True, trigger_ratio=1.0)
        rng = np.random.default_rng(3)
        n_mirror = np.array([-1.0, 1.0, 0.0]) / np.sqrt(2.0)
        p_plane = np.array([5.0, 0.0, 0.0])
        for _ in range(25):
            az = rng.uniform(-0.03, 0.03)
            el = rng.uniform(-0.03, 0.03)
            d = np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])
            origin = np.zeros(3)
            hit = first_hit(mirror_scene, origin, d)
            out = resolve_hit(mirror_scene, origin, d, hit, cfg, rng)
            assert out.kind is GhostKind.GHOST
            # true secondary point, then reflected through the glossy plane
            true_secondary = hit.position + out.b * (
                d - 2 * float(d @ n_mirror) * n_mirror)
            mirrored = true_secondary - 2 * float((true_secondary - p_plane) @ n_mirror) * n_mirror
            np.testing.assert_allclose(out.position, mirrored, atol=1e-6)

    def test_escaped_reflection_is_no_return(self):
        # Only the glossy plane, no diffuse wall: the reflected ray finds nothing.
        import infralidar.scene as sc
        mats = (sc.MaterialSurface(0.95, 0.3, Label.GLASS, "mirror"),)
        tri = sc.TriangleGeometry
        span, u, w = 40.0, np.array([1, 1, 0]) / np.sqrt(2), np.array([0, 0, 1.0])
        p0 = np.array([5.0, 0.0, 0.0])
        c = [p0 - span * u - span * w, p0 + span * u - span * w,
             p0 + span * u + span * w, p0 - span * u + span * w]
        only_glossy = sc.build_scene(sc.SceneFile(materials=mats, geometry=(
            tri("mirror", (tuple(c[0]), tuple(c[1]), tuple(c[2]))),
            tri("mirror", (tuple(c[0]), tuple(c[2]), tuple(c[3]))))))
        cfg = GhostConfig(enabled=True, trigger_ratio=1.0)
        origin, d = np.zeros(3), np.array([1.0, 0.0, 0.0])
        out = resolve_hit(only_glossy, origin, d, first_hit(only_glossy, origin, d),
                          cfg, np.random.default_rng(0))
        assert out.kind is GhostKind.NO_RETURN
        assert out.position is None

    def test_trigger_ratio_zero_matches_disabled(self, mirror_scene):
        origin, d = np.zeros(3), np.array([1.0, 0.0, 0.0])
        hit = first_hit(mirror_scene, origin, d)
        off = resolve_hit(mirror_scene, origin, d, hit, GhostConfig(enabled=False),
                          np.random.default_rng(7))
        zero = resolve_hit(mirror_scene, origin, d, hit,
                           GhostConfig(enabled=True, trigger_ratio=0.0),
                           np.random.default_rng(7))
        assert off.kind is zero.kind is GhostKind.REAL
        assert off.a == zero.a
        np.testing.assert_array_equal(off.position, zero.position)

    def test_trigger_fraction_half(self, mirror_scene):
        cfg = GhostConfig(enabled=True, trigger_ratio=0.5)
        rng = np.random.default_rng(2024)
        origin, d = np.zeros(3), np.array([1.0, 0.0, 0.0])
        hit = first_hit(mirror_scene, origin, d)
        kinds = [resolve_hit(mirror_scene, origin, d, hit, cfg, rng).kind
                 for _ in range(10_000)]
        frac = sum(k is GhostKind.GHOST for k in kinds) / len(kinds)
        assert 0.45 <= frac <= 0.55


class TestResolveBatch:
    def test_batch_matches_scalar(self, mirror_scene):
        cfg = GhostConfig(enabled=True, trigger_ratio=1.0)
        rng = np.random.default_rng(5)
        az = rng.uniform(-0.03, 0.03, size=64)
        el = rng.uniform(-0.03, 0.03, size=64)
        dirs = np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az),
                         np.sin(el)], axis=1)
        origins = np.zeros((64, 3))
        tri, t = cast_rays(mirror_scene, origins, dirs, t_max=100.0)
        keep, dist, surf, is_ghost = resolve_batch(
            mirror_scene, origins, dirs, tri, t, cfg,
            trigger_u=np.zeros(64), t_max=100.0)
        assert keep.all() and is_ghost.all()
        for i in range(0, 64, 7):
            hit = cast_ray(mirror_scene, origins[i], dirs[i])
            out = resolve_hit(mirror_scene, origins[i], dirs[i], hit, cfg,
                              np.random.default_rng(0))
            assert dist[i] == pytest.approx(out.a + out.b, abs=1e-9)
            assert int(surf[i]) == out.surface_id

    def test_untriggered_slots_keep_wall_point(self, mirror_scene):
        cfg = GhostConfig(enabled=True, trigger_ratio=0.5)
        n = 10
        dirs = np.tile([1.0, 0.0, 0.0], (n, 1))
        origins = np.zeros((n, 3))
        tri, t = cast_rays(mirror_scene, origins, dirs, t_max=100.0)
        u = np.array([0.1, 0.9] * 5)  # alternate below/above the trigger ratio
        keep, dist, surf, is_ghost = resolve_batch(
            mirror_scene, origins, dirs, tri, t, cfg, trigger_u=u, t_max=100.0)
        np.testing.assert_array_equal(is_ghost, u < 0.5)
        np.testing.assert_allclose(dist[~is_ghost], 5.0, atol=1e-9)
        np.testing.assert_allclose(dist[is_ghost], 8.0, atol=1e-9)


def test_config_validation():
    with pytest.raises(Exception):
        GhostConfig(smoothness_threshold=1.5)
    with pytest.raises(Exception):
        GhostConfig(trigger_ratio=-0.1)
    with pytest.raises(Exception):
        GhostConfig(max_bounces=2)
