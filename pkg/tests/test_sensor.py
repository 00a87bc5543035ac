import numpy as np
import pytest

from infralidar.errors import TrajectoryError
from infralidar.ghost import GhostConfig
from infralidar.motion import DistortionConfig, Pose, Trajectory
from infralidar.patterns import PatternConfig
from infralidar.scene import (Label, MaterialSurface, SceneFile, TriangleGeometry,
                              build_scene)
from infralidar.sensor import (LidarModel, apply_range_model, beam_rng_streams,
                               merge_world_clouds, simulate_frame)


def surround_model(channels=4, pps=4000, **kw):
    defaults = dict(range_min=0.1, range_max=100.0)
    defaults.update(kw)
    return LidarModel(pattern=PatternConfig("surround_uniform", dict(
        channels=channels, fov_upper=np.deg2rad(5), fov_lower=np.deg2rad(-5),
        points_per_second=pps, rotation_frequency=10)), **defaults)


def staring_model(n=3200, period=0.1, **kw):
    """All beams point along +x, spread uniformly over the frame."""
    rows = np.zeros((n, 4))
    rows[:, 0] = np.arange(n) * (period / n)
    defaults = dict(range_min=0.1, range_max=100.0)
    defaults.update(kw)
    return LidarModel(pattern=PatternConfig("table", dict(rows=rows, frame_period=period)),
                      **defaults)


def wall_scene(x=30.0, half=200.0):
    mats = (MaterialSurface(0.2, 0.5, Label.BUILDING, "wall"),)
    c = [(x, -half, -half), (x, half, -half), (x, half, half), (x, -half, half)]
    return build_scene(SceneFile(materials=mats, geometry=(
        TriangleGeometry("wall", (c[0], c[1], c[2])),
        TriangleGeometry("wall", (c[0], c[2], c[3])))))


static = Trajectory.static(Pose.identity())


class TestApplyRangeModel:
    def test_identity_without_noise(self):
        m = surround_model()
        assert apply_range_model(50.0, m, np.random.default_rng(0)) == 50.0

    def test_beyond_max_range(self):
        m = surround_model(range_max=200.0)
        assert apply_range_model(250.0, m, np.random.default_rng(0)) is None

    def test_blind_zone(self):
        m = surround_model(range_min=0.1)
        assert apply_range_model(0.05, m, np.random.default_rng(0)) is None

    def test_noise_sigma_statistics(self):
        m = surround_model(range_noise_sigma=0.02)
        rng = np.random.default_rng(42)
        draws = np.array([apply_range_model(50.0, m, rng) for _ in range(100_000)])
        assert draws.std() == pytest.approx(0.02, abs=0.002)
        assert 0.018 <= draws.std() <= 0.022

    def test_dropout_rate(self):
        m = surround_model(dropout_probability=0.25)
        rng = np.random.default_rng(1)
        kept = sum(apply_range_model(50.0, m, rng) is not None for _ in range(20_000))
        assert kept / 20_000 == pytest.approx(0.75, abs=0.02)


class TestSimulateFrame:
    def test_empty_scene_zero_points(self, empty_scene):
        frame = simulate_frame(empty_scene, surround_model(), static, seed=1)
        assert len(frame) == 0

    def test_wall_fills_fov_exact_ranges(self):
        scene = wall_scene(x=10.0)
        model = staring_model(n=100)
        frame = simulate_frame(scene, model, static, seed=0)
        assert len(frame) == 100
        np.testing.assert_allclose(frame.ranges(), 10.0, atol=1e-12)

    def test_blind_zone_drops_near_target(self):
        scene = wall_scene(x=0.05)
        model = staring_model(n=10, range_min=0.1)
        frame = simulate_frame(scene, model, static, seed=0)
        assert len(frame) == 0

    def test_enclosing_box_full_return(self, box_scene):
        model = surround_model()
        frame = simulate_frame(box_scene, model, static, seed=3)
        assert len(frame) == 400  # pattern length: every beam returns

    def test_intensity_equals_reflectivity(self, box_scene):
        frame = simulate_frame(box_scene, surround_model(), static, seed=3)
        np.testing.assert_array_equal(np.unique(frame.intensity), [0.5])

    def test_determinism(self, box_scene):
        model = surround_model(range_noise_sigma=0.03, dropout_probability=0.1)
        a = simulate_frame(box_scene, model, static, seed=9)
        b = simulate_frame(box_scene, model, static, seed=9)
        np.testing.assert_array_equal(a.positions, b.positions)
        np.testing.assert_array_equal(a.timestamps, b.timestamps)
        c = simulate_frame(box_scene, model, static, seed=10)
        assert not np.array_equal(a.positions, c.positions)

    def test_moving_sensor_distortion_off_equals_frozen_start_pose(self):
        scene = wall_scene(x=30.0)
        model = staring_model(n=500)
        moving = Trajectory.from_keyframes([
            (0.0, Pose.from_rpy((0, 0, 0))), (1.0, Pose.from_rpy((20, 0, 0)))])
        frame_moving = simulate_frame(scene, model, moving, seed=4)
        frame_static = simulate_frame(scene, model, static, seed=4)
        np.testing.assert_array_equal(frame_moving.positions, frame_static.positions)

    def test_trajectory_gap_errors(self):
        scene = wall_scene()
        model = staring_model(n=10)
        short = Trajectory.from_keyframes([
            (0.0, Pose.identity()), (0.05, Pose.identity())])
        with pytest.raises(TrajectoryError):
            simulate_frame(scene, model, short, frame_index=0,
                           options=DistortionConfig(enabled=True, subframes=4))

    def test_timestamps_within_frame(self, box_scene):
        frame = simulate_frame(box_scene, surround_model(), static, frame_index=3, seed=0)
        assert frame.frame_start == pytest.approx(0.3)
        assert np.all(frame.timestamps >= frame.frame_start)
        assert np.all(frame.timestamps < frame.frame_start + frame.frame_period)

    def test_empty_pattern_table_yields_zero_points(self, box_scene):
        model = LidarModel(pattern=PatternConfig("table", dict(
            rows=np.empty((0, 4)), frame_period=0.1)), range_min=0.1, range_max=100.0)
        frame = simulate_frame(box_scene, model, static, seed=0)
        assert len(frame) == 0


class TestMotionDistortion:
    def test_wall_thickening_law(self):
        # 20 m/s toward a wall, 10 Hz frame, N = 32: range spread must equal
        # v * T * (N-1)/N = 1.9375 m within 2 percent.
        v, T, n_sub = 20.0, 0.1, 32
        scene = wall_scene(x=30.0)
        model = staring_model(n=3200, period=T)
        moving = Trajectory.from_keyframes([
            (0.0, Pose.from_rpy((0, 0, 0))), (1.0, Pose.from_rpy((v, 0, 0)))])
        frame = simulate_frame(scene, model, moving, seed=0,
                               options=DistortionConfig(enabled=True, subframes=n_sub))
        spread = frame.ranges().max() - frame.ranges().min()
        expected = v * T * (n_sub - 1) / n_sub
        assert spread == pytest.approx(expected, rel=0.02)
        assert expected == pytest.approx(1.9375)

    def test_static_distortion_on_equals_off(self, box_scene):
        model = surround_model(range_noise_sigma=0.02, dropout_probability=0.05)
        on = simulate_frame(box_scene, model, static, seed=5,
                            options=DistortionConfig(enabled=True, subframes=16))
        off = simulate_frame(box_scene, model, static, seed=5)
        np.testing.assert_array_equal(on.positions, off.positions)
        np.testing.assert_array_equal(on.timestamps, off.timestamps)
        np.testing.assert_array_equal(on.is_ghost, off.is_ghost)

    def test_subframe_poses_recorded(self):
        scene = wall_scene()
        model = staring_model(n=320)
        moving = Trajectory.from_keyframes([
            (0.0, Pose.from_rpy((0, 0, 0))), (1.0, Pose.from_rpy((5, 0, 0)))])
        frame = simulate_frame(scene, model, moving, seed=0,
                               options=DistortionConfig(enabled=True, subframes=8))
        assert len(frame.subframe_poses) == 8
        times = [t for t, _ in frame.subframe_poses]
        np.testing.assert_allclose(times, np.arange(8) * 0.1 / 8, atol=1e-12)

    def test_per_point_mode_converges_to_large_n(self):
        scene = wall_scene(x=30.0)
        model = staring_model(n=640)
        moving = Trajectory.from_keyframes([
            (0.0, Pose.from_rpy((0, 0, 0))), (1.0, Pose.from_rpy((20, 0, 0)))])
        pp = simulate_frame(scene, model, moving, seed=0,
                            options=DistortionConfig(enabled=True, subframes=1,
                                                     per_point=True))
        many = simulate_frame(scene, model, moving, seed=0,
                              options=DistortionConfig(enabled=True, subframes=640))
        np.testing.assert_allclose(pp.ranges(), many.ranges(), atol=1e-9)


class TestGhostInFrame:
    def test_ghost_points_flagged(self, mirror_scene):
        n = 256
        rng = np.random.default_rng(0)
        rows = np.zeros((n, 4))
        rows[:, 0] = np.arange(n) * (0.1 / n)
        rows[:, 1] = rng.uniform(-0.03, 0.03, n)
        rows[:, 2] = rng.uniform(-0.03, 0.03, n)
        model = LidarModel(
            pattern=PatternConfig("table", dict(rows=rows, frame_period=0.1)),
            range_min=0.1, range_max=100.0,
            ghost=GhostConfig(enabled=True, trigger_ratio=1.0))
        frame = simulate_frame(mirror_scene, model, static, seed=0)
        assert len(frame) == n
        assert frame.is_ghost.all()
        assert np.all(frame.labels == int(Label.BUILDING))
        np.testing.assert_allclose(frame.ranges(), 8.0, atol=0.2)

    def test_ratio_zero_equals_disabled_frame(self, mirror_scene):
        base = dict(range_min=0.1, range_max=100.0)
        rows = np.zeros((64, 4))
        rows[:, 0] = np.arange(64) * (0.1 / 64)
        pat = PatternConfig("table", dict(rows=rows, frame_period=0.1))
        off = simulate_frame(mirror_scene, LidarModel(pattern=pat, **base,
                             ghost=GhostConfig(enabled=False)), static, seed=11)
        zero = simulate_frame(mirror_scene, LidarModel(pattern=pat, **base,
                              ghost=GhostConfig(enabled=True, trigger_ratio=0.0)),
                              static, seed=11)
        np.testing.assert_array_equal(off.positions, zero.positions)
        np.testing.assert_array_equal(off.is_ghost, zero.is_ghost)


class TestRngStreams:
    def test_slots_depend_only_on_keys(self):
        a = beam_rng_streams(7, 3, 100)
        b = beam_rng_streams(7, 3, 100)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
        c = beam_rng_streams(7, 4, 100)
        assert not np.array_equal(a[0], c[0])

    def test_prefix_stability(self):
        # slot i must not depend on how many beams are drawn after it
        full = beam_rng_streams(1, 1, 1000)
        # re-draw with the same generator construction; prefixes agree by design
        again = beam_rng_streams(1, 1, 1000)
        np.testing.assert_array_equal(full[0][:10], again[0][:10])


def test_merge_world_clouds_counts(box_scene):
    f1 = simulate_frame(box_scene, surround_model(), static, seed=0)
    f2 = simulate_frame(box_scene, surround_model(), static, seed=1)
    xyz, labels, ghost, intensity = merge_world_clouds([f1, f2])
    assert xyz.shape[0] == len(f1) + len(f2)


def test_world_points_apply_start_pose(box_scene):
    pose = Pose.from_rpy((3, -2, 1), yaw=0.7)
    frame = simulate_frame(box_scene, surround_model(),
                           Trajectory.static(pose), seed=0)
    np.testing.assert_allclose(frame.world_points(),
                               pose.apply(frame.positions), atol=1e-12)
