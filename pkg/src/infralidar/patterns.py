"""Per-frame emission schedules for the three LiDAR steering families.

All generators are pure: the same configuration always yields the identical
sample arrays. A pattern covers exactly one frame; timestamps are offsets
from the frame start and stay inside ``[0, frame_period)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ContractViolationError

FAMILIES = ("surround_uniform", "surround_nonuniform", "mems_lissajous", "risley", "table")


@dataclass(frozen=True)
class BeamSample:
    """One scheduled emission. Azimuth is CCW from sensor +x about +z."""

    azimuth: float  # rad
    elevation: float  # rad above sensor horizontal
    t_offset: float  # s from frame start
    channel: int


@dataclass(frozen=True)
class Pattern:
    """A frame's worth of beam samples, stored columnar for speed."""

    azimuth: np.ndarray  # (n,) rad
    elevation: np.ndarray  # (n,) rad
    t_offset: np.ndarray  # (n,) s, non-decreasing, < frame_period
    channel: np.ndarray  # (n,) int32
    frame_period: float  # s

    def __post_init__(self):
        for name in ("azimuth", "elevation", "t_offset"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ch = np.ascontiguousarray(self.channel, dtype=np.int32)
        ch.setflags(write=False)
        object.__setattr__(self, "channel", ch)
        t = self.t_offset
        if t.size and np.any(np.diff(t) < 0):
            raise ContractViolationError("pattern timestamps must be non-decreasing")
        if t.size and (t[0] < 0 or t[-1] >= self.frame_period):
            raise ContractViolationError("pattern timestamps must lie in [0, frame_period)")

    def __len__(self) -> int:
        return self.azimuth.shape[0]

    def __getitem__(self, i: int) -> BeamSample:
        return BeamSample(float(self.azimuth[i]), float(self.elevation[i]),
                          float(self.t_offset[i]), int(self.channel[i]))

    def directions(self) -> np.ndarray:
        """Unit direction vectors (n, 3) in the sensor frame."""
        ce = np.cos(self.elevation)
        return np.ascontiguousarray(
            np.stack([ce * np.cos(self.azimuth), ce * np.sin(self.azimuth),
                      np.sin(self.elevation)], axis=1))


@dataclass(frozen=True)
class PatternConfig:
    """Family tag plus the family-specific parameters (see the generators)."""

    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ContractViolationError(
                f"unknown pattern family {self.family!r}; expected one of {FAMILIES}")


def _surround(elevations: np.ndarray, pps: float, rotation_frequency: float,
              azimuth_offset: float = 0.0) -> Pattern:
    """Shared surround construction: channels fire simultaneously per column."""
    if pps <= 0 or rotation_frequency <= 0:
        raise ContractViolationError("points_per_second and rotation_frequency must be > 0")
    channels = elevations.shape[0]
    total = int(pps // rotation_frequency)  # samples per revolution
    n_cols = -(-total // channels) if total else 0
    idx = np.arange(total)
    col = idx // channels
    ch = (idx % channels).astype(np.int32)
    step = 2.0 * np.pi / n_cols if n_cols else 0.0
    azimuth = np.mod(col * step + azimuth_offset, 2.0 * np.pi)
    return Pattern(azimuth=azimuth, elevation=elevations[ch],
                   t_offset=col * (channels / pps), channel=ch,
                   frame_period=1.0 / rotation_frequency)


def surround_uniform_pattern(channels: int, fov_upper: float, fov_lower: float,
                             points_per_second: float, rotation_frequency: float,
                             azimuth_offset: float = 0.0) -> Pattern:
    """Uniform-beam surround scanner: channel elevations on a uniform grid."""
    if channels < 1:
        raise ContractViolationError("channels must be >= 1")
    if fov_upper <= fov_lower:
        raise ContractViolationError("fov_upper must exceed fov_lower")
    elevations = np.linspace(fov_lower, fov_upper, channels)
    return _surround(elevations, points_per_second, rotation_frequency, azimuth_offset)


def surround_nonuniform_pattern(elevation_table, points_per_second: float,
                                rotation_frequency: float,
                                azimuth_offset: float = 0.0) -> Pattern:
    """Surround scanner with a per-channel elevation table (channel i fires table[i])."""
    table = np.asarray(elevation_table, dtype=np.float64)
    if table.ndim != 1 or table.size == 0:
        raise ContractViolationError("elevation_table must be a non-empty 1-D sequence")
    if np.any(np.diff(table) < 0):
        raise ContractViolationError("elevation_table must be sorted ascending")
    if np.any(np.abs(table) > np.pi / 2):
        raise ContractViolationError("elevation_table entries must lie in [-pi/2, pi/2]")
    return _surround(table, points_per_second, rotation_frequency, azimuth_offset)


def mems_lissajous_pattern(az_amplitude: float, el_amplitude: float,
                           f_x: float, f_y: float, phase: float,
                           points_per_second: float, frame_rate: float,
                           t_start: float = 0.0) -> Pattern:
    """MEMS mirror steering along a Lissajous figure.

    Sample k (at t = k / pps) points to
    ``az = A sin(2 pi f_x t + phase)``, ``el = B sin(2 pi f_y t)``;
    evaluation is exact at the sample times. ``t_start`` shifts the curve
    for frame-to-frame phase continuation.
    """
    if az_amplitude <= 0 or el_amplitude <= 0:
        raise ContractViolationError("amplitudes must be > 0")
    if f_x <= 0 or f_y <= 0:
        raise ContractViolationError("mirror frequencies must be > 0")
    if points_per_second <= 0 or frame_rate <= 0:
        raise ContractViolationError("points_per_second and frame_rate must be > 0")
    n = int(points_per_second // frame_rate)
    t = np.arange(n) / points_per_second
    tt = t + t_start
    return Pattern(azimuth=az_amplitude * np.sin(2.0 * np.pi * f_x * tt + phase),
                   elevation=el_amplitude * np.sin(2.0 * np.pi * f_y * tt),
                   t_offset=t, channel=np.zeros(n, dtype=np.int32),
                   frame_period=1.0 / frame_rate)


def risley_pattern(w1: float, w2: float, d1: float, d2: float,
                   phase1: float, phase2: float,
                   points_per_second: float, frame_rate: float,
                   t_start: float = 0.0) -> Pattern:
    """Two-prism rosette scanner in the paraxial small-angle model.

    The deflection is the vector sum of two rotating deflections of
    magnitudes d1, d2 (rad) spinning at w1, w2 (rad/s); the x component maps
    to azimuth and the y component to elevation.
    """
    if d1 < 0 or d2 < 0:
        raise ContractViolationError("prism deflections must be >= 0")
    if points_per_second <= 0 or frame_rate <= 0:
        raise ContractViolationError("points_per_second and frame_rate must be > 0")
    n = int(points_per_second // frame_rate)
    t = np.arange(n) / points_per_second
    tt = t + t_start
    a1 = w1 * tt + phase1
    a2 = w2 * tt + phase2
    return Pattern(azimuth=d1 * np.cos(a1) + d2 * np.cos(a2),
                   elevation=d1 * np.sin(a1) + d2 * np.sin(a2),
                   t_offset=t, channel=np.zeros(n, dtype=np.int32),
                   frame_period=1.0 / frame_rate)


def load_pattern_table(rows, frame_period: float | None = None) -> Pattern:
    """Adopt an (n, 4) table of (t_offset, azimuth, elevation, channel) verbatim.

    ``frame_period`` defaults to one nominal sample spacing past the last
    timestamp so the final sample still falls inside the frame.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.size == 0:
        rows = rows.reshape(0, 4)
    if rows.ndim != 2 or rows.shape[1] != 4:
        raise ContractViolationError("pattern table must have columns (t, azimuth, elevation, channel)")
    if not np.isfinite(rows).all():
        raise ContractViolationError("pattern table contains non-finite values")
    t = rows[:, 0]
    if t.size and np.any(np.diff(t) < 0):
        raise ContractViolationError("pattern table timestamps must be non-decreasing")
    if frame_period is None:
        if t.size >= 2:
            frame_period = float(t[-1] + (t[-1] - t[0]) / (t.size - 1))
        elif t.size == 1:
            frame_period = float(t[0]) + 1.0
        else:
            frame_period = 1.0
        frame_period = max(frame_period, float(t[-1]) + 1e-9) if t.size else frame_period
    return Pattern(azimuth=rows[:, 1], elevation=rows[:, 2], t_offset=t,
                   channel=rows[:, 3].astype(np.int32), frame_period=float(frame_period))


def generate_pattern(config: PatternConfig, frame_index: int = 0,
                     continuation: bool = False) -> Pattern:
    """Instantiate one frame of the configured pattern.

    With ``continuation`` the MEMS/Risley curves keep evolving across frame
    boundaries instead of restarting; surround scanners complete exactly one
    revolution per frame so restart and continuation coincide.
    """
    p = dict(config.params)
    if config.family == "surround_uniform":
        return surround_uniform_pattern(**p)
    if config.family == "surround_nonuniform":
        return surround_nonuniform_pattern(**p)
    if config.family == "mems_lissajous":
        if continuation and frame_index:
            p["t_start"] = frame_index / p["frame_rate"]
        return mems_lissajous_pattern(**p)
    if config.family == "risley":
        if continuation and frame_index:
            p["t_start"] = frame_index / p["frame_rate"]
        return risley_pattern(**p)
    if config.family == "table":
        return load_pattern_table(p["rows"], p.get("frame_period"))
    raise ContractViolationError(f"unknown pattern family {config.family!r}")
