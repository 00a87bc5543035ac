import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infralidar.errors import ContractViolationError, TrajectoryError
from infralidar.motion import (DistortionConfig, Pose, Trajectory, accumulate_frame,
                               partition_subframes, pose_at, poses_at)
from infralidar.patterns import load_pattern_table


def linear_trajectory(p0, p1, t0=0.0, t1=1.0):
    return Trajectory.from_keyframes([
        (t0, Pose.from_rpy(p0)), (t1, Pose.from_rpy(p1))])


class TestPose:
    def test_normalization_enforced(self):
        with pytest.raises(ContractViolationError):
            Pose(np.zeros(3), np.array([0.0, 0.0, 0.0, 0.5]))

    def test_rpy_roundtrip(self):
        pose = Pose.from_rpy((1, 2, 3), roll=0.1, pitch=-0.4, yaw=2.0)
        roll, pitch, yaw = pose.to_rpy()
        assert (roll, pitch, yaw) == pytest.approx((0.1, -0.4, 2.0))

    def test_yaw_rotates_forward_vector(self):
        pose = Pose.from_rpy((0, 0, 0), yaw=np.pi / 2)
        np.testing.assert_allclose(pose.apply(np.array([[1.0, 0, 0]])),
                                   [[0, 1, 0]], atol=1e-12)


class TestPoseAt:
    def test_keyframe_times_exact(self):
        traj = linear_trajectory((0, 0, 0), (2, 0, 0))
        np.testing.assert_array_equal(pose_at(traj, 0.0).translation, [0, 0, 0])
        np.testing.assert_array_equal(pose_at(traj, 1.0).translation, [2, 0, 0])

    def test_pure_translation_midpoint(self):
        traj = linear_trajectory((0, 0, 0), (2, 0, 0))
        np.testing.assert_allclose(pose_at(traj, 0.5).translation, [1, 0, 0], atol=1e-15)

    def test_yaw_slerp_midpoint(self):
        traj = Trajectory.from_keyframes([
            (0.0, Pose.from_rpy((0, 0, 0), yaw=0.0)),
            (1.0, Pose.from_rpy((0, 0, 0), yaw=np.pi / 2))])
        _, _, yaw = pose_at(traj, 0.5).to_rpy()
        assert yaw == pytest.approx(np.pi / 4, abs=1e-9)

    def test_no_extrapolation(self):
        traj = linear_trajectory((0, 0, 0), (1, 0, 0))
        with pytest.raises(TrajectoryError):
            pose_at(traj, -0.1)
        with pytest.raises(TrajectoryError):
            pose_at(traj, 1.1)

    def test_static_covers_everything(self):
        traj = Trajectory.static(Pose.from_rpy((5, 5, 5)))
        np.testing.assert_array_equal(pose_at(traj, 123.0).translation, [5, 5, 5])

    def test_vectorized_matches_scalar(self):
        traj = Trajectory.from_keyframes([
            (0.0, Pose.from_rpy((0, 0, 0), yaw=0.0)),
            (1.0, Pose.from_rpy((3, 1, 0), yaw=1.2)),
            (2.0, Pose.from_rpy((6, 0, 0), yaw=0.4))])
        ts = np.linspace(0, 2, 17)
        trans, mats = poses_at(traj, ts)
        for i, t in enumerate(ts):
            p = pose_at(traj, float(t))
            np.testing.assert_allclose(trans[i], p.translation, atol=1e-12)
            np.testing.assert_allclose(mats[i], p.rotation_matrix(), atol=1e-12)


def uniform_pattern(n, period=0.1):
    rows = np.zeros((n, 4))
    rows[:, 0] = np.arange(n) * (period / n)
    return load_pattern_table(rows, frame_period=period)


class TestPartition:
    def test_single_batch_is_whole_pattern(self):
        p = uniform_pattern(100)
        batches = partition_subframes(p, 1)
        assert len(batches) == 1
        assert (batches[0].start, batches[0].stop) == (0, 100)
        assert batches[0].pose_time == 0.0

    def test_uniform_split_counts(self):
        p = uniform_pattern(1000)
        batches = partition_subframes(p, 10)
        assert [b.stop - b.start for b in batches] == [100] * 10
        np.testing.assert_allclose([b.pose_time for b in batches],
                                   np.arange(10) * 0.01, atol=1e-15)

    @given(n=st.integers(1, 37), count=st.integers(1, 200))
    @settings(max_examples=40, deadline=None)
    def test_partition_preserves_pattern(self, n, count):
        rng = np.random.default_rng(count * 41 + n)
        t = np.sort(rng.uniform(0, 0.1, size=count))
        t[-1] = min(t[-1], 0.1 - 1e-9)
        rows = np.column_stack([t, rng.normal(size=count), rng.normal(size=count),
                                np.zeros(count)])
        p = load_pattern_table(rows, frame_period=0.1)
        batches = partition_subframes(p, n)
        assert batches[0].start == 0
        assert batches[-1].stop == count
        for prev, cur in zip(batches, batches[1:]):
            assert prev.stop == cur.start
        for b in batches:
            sl = p.t_offset[b.start:b.stop]
            assert np.all(sl >= b.pose_time - 1e-12)

    def test_invalid_count(self):
        with pytest.raises(ContractViolationError):
            partition_subframes(uniform_pattern(10), 0)


class TestAccumulate:
    def test_identity_for_one_batch(self):
        bundle = {"a": np.arange(5), "b": np.ones((5, 3))}
        out = accumulate_frame([bundle])
        np.testing.assert_array_equal(out["a"], bundle["a"])

    def test_counts_and_order(self):
        b1 = {"t": np.array([0.0, 0.1])}
        b2 = {"t": np.array([0.2])}
        b3 = {"t": np.array([0.3, 0.4, 0.5])}
        out = accumulate_frame([b1, b2, b3])
        assert out["t"].shape[0] == 6
        assert np.all(np.diff(out["t"]) >= 0)


def test_distortion_config_validates():
    with pytest.raises(ContractViolationError):
        DistortionConfig(enabled=True, subframes=0)
