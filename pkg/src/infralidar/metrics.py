"""Region-of-interest point-cloud metrics: density and uniformity.

Density is point count per area over a yawed rectangular ground region.
Uniformity is the dispersion of normalized point counts over randomly
placed equal disks inside the region; lower means more uniform. Disk
centers are sampled in region-local coordinates, inset by the disk radius,
so the metric is invariant under rigid motion of cloud and region together.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, MetricsUndefinedError
from .scene import Label

DEFAULT_DISKS = 100
DEFAULT_DISK_RATIO = 0.005
DEFAULT_NUC_LABELS = ("road",)


@dataclass(frozen=True)
class InfraLob:
    """Rectangular region of interest on the ground plane."""

    center: tuple[float, float]  # m
    half_extents: tuple[float, float]  # m
    yaw: float = 0.0  # rad
    z_band: tuple[float, float] = (-1.0, 1.0)  # m, inclusive point inclusion band

    def __post_init__(self):
        if min(self.half_extents) <= 0:
            raise ContractViolationError("half_extents must be > 0")
        if self.z_band[0] >= self.z_band[1]:
            raise ContractViolationError("z_band must satisfy z_lo < z_hi")

    @property
    def area(self) -> float:
        """Region area S = 4 * he_x * he_y, m^2."""
        return 4.0 * self.half_extents[0] * self.half_extents[1]

    def local_xy(self, xyz: np.ndarray) -> np.ndarray:
        """World points -> region-local 2-D coordinates."""
        xy = np.asarray(xyz)[:, :2] - np.asarray(self.center)
        c, s = np.cos(-self.yaw), np.sin(-self.yaw)
        return np.stack([c * xy[:, 0] - s * xy[:, 1],
                         s * xy[:, 0] + c * xy[:, 1]], axis=1)


@dataclass(frozen=True)
class NucParams:
    """Disk-sampling parameters for the uniformity coefficient."""

    disks: int = DEFAULT_DISKS  # D
    disk_ratio: float = DEFAULT_DISK_RATIO  # p, disk area / region area
    seed: int = 0

    def __post_init__(self):
        if self.disks < 2:
            raise ContractViolationError("need at least 2 disks")
        if not (0.0 < self.disk_ratio < 1.0):
            raise ContractViolationError("disk_ratio must be in (0, 1)")

    def disk_radius(self, lob: InfraLob) -> float:
        return float(np.sqrt(self.disk_ratio * lob.area / np.pi))


@dataclass(frozen=True)
class MetricsReport:
    """Metric values plus everything needed to reproduce them."""

    n_lob: int  # points inside the region (density numerator)
    area: float  # m^2
    infra_d: float  # points / m^2
    infra_nuc: float
    nuc_avg: float  # mean of n_i / (N p)
    disk_counts: tuple[int, ...]
    disk_centers: tuple[tuple[float, float], ...]  # region-local coords
    n_nuc: int  # points the uniformity ran on (after label filtering)
    nuc_params: NucParams
    nuc_label_filter: tuple[str, ...] | None
    density_label_filter: tuple[str, ...] | None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "InfraD": self.infra_d,
            "InfraNUC": self.infra_nuc,
            "n_lob": self.n_lob,
            "n_nuc": self.n_nuc,
            "area_m2": self.area,
            "nuc_avg": self.nuc_avg,
            "disk_counts": list(self.disk_counts),
            "disk_centers": [list(c) for c in self.disk_centers],
            "params": {
                "disks": self.nuc_params.disks,
                "disk_ratio": self.nuc_params.disk_ratio,
                "seed": self.nuc_params.seed,
                "nuc_label_filter": list(self.nuc_label_filter) if self.nuc_label_filter else None,
                "density_label_filter": list(self.density_label_filter)
                if self.density_label_filter else None,
            },
            "extras": self.extras,
        }


def _label_codes(names) -> np.ndarray:
    return np.asarray(sorted(int(Label.from_name(n)) for n in names), dtype=np.int32)


def points_in_lob(xyz: np.ndarray, lob: InfraLob, labels: np.ndarray | None = None,
                  label_filter=None) -> np.ndarray:
    """Indices of points inside the yawed rectangle and z band (and label set)."""
    xyz = np.asarray(xyz, dtype=np.float64)
    if xyz.size == 0:
        return np.empty(0, dtype=np.intp)
    local = lob.local_xy(xyz)
    inside = ((np.abs(local[:, 0]) <= lob.half_extents[0]) &
              (np.abs(local[:, 1]) <= lob.half_extents[1]) &
              (xyz[:, 2] >= lob.z_band[0]) & (xyz[:, 2] <= lob.z_band[1]))
    if label_filter is not None:
        if labels is None:
            raise ContractViolationError("label_filter given but cloud has no labels")
        inside &= np.isin(labels, _label_codes(label_filter))
    return np.nonzero(inside)[0]


def infra_density(subset: np.ndarray, lob: InfraLob) -> float:
    """Point density N / S over the region."""
    n = int(np.asarray(subset).shape[0])
    return n / lob.area


def sample_disk_centers(lob: InfraLob, params: NucParams) -> np.ndarray:
    """Disk centers (D, 2) in region-local coordinates, inset by the radius."""
    radius = params.disk_radius(lob)
    hx, hy = lob.half_extents
    if radius > min(hx, hy):
        raise ContractViolationError(
            f"disk radius {radius:.3f} m does not fit inside half extents {lob.half_extents}")
    rng = np.random.default_rng(params.seed)
    return rng.uniform([-(hx - radius), -(hy - radius)],
                       [hx - radius, hy - radius], size=(params.disks, 2))


def infra_nuc(subset_xyz: np.ndarray, lob: InfraLob, params: NucParams):
    """Normalized uniformity coefficient over random equal disks.

    Returns (nuc, avg, disk_counts, disk_centers). Raises
    MetricsUndefinedError for an empty subset rather than reporting 0.
    """
    subset_xyz = np.asarray(subset_xyz, dtype=np.float64)
    n = subset_xyz.shape[0]
    if n == 0:
        raise MetricsUndefinedError("uniformity is undefined for an empty region")
    centers = sample_disk_centers(lob, params)
    radius = params.disk_radius(lob)
    local = lob.local_xy(subset_xyz)
    r2 = radius * radius
    counts = np.zeros(params.disks, dtype=np.int64)
    for start in range(0, n, 65536):  # bound the (D, chunk) distance matrix
        chunk = local[start:start + 65536]
        d2 = ((chunk[None, :, :] - centers[:, None, :]) ** 2).sum(axis=2)
        counts += (d2 <= r2).sum(axis=1)
    terms = counts / (n * params.disk_ratio)
    avg = float(terms.mean())
    nuc = float(np.sqrt(((terms - avg) ** 2).mean()))
    return nuc, avg, counts.astype(int), centers


def compute_metrics(xyz: np.ndarray, labels: np.ndarray | None, lob: InfraLob,
                    params: NucParams | None = None,
                    nuc_label_filter=DEFAULT_NUC_LABELS,
                    density_label_filter=None,
                    extras: dict | None = None) -> MetricsReport:
    """Full report: density over the region, uniformity over the filtered subset.

    By default density counts every point in the region while uniformity
    runs on road-labeled points only; pass ``nuc_label_filter=None`` to run
    it unfiltered.
    """
    params = params or NucParams()
    dens_idx = points_in_lob(xyz, lob, labels, density_label_filter)
    nuc_idx = points_in_lob(xyz, lob, labels, nuc_label_filter) \
        if nuc_label_filter is not None else dens_idx
    xyz = np.asarray(xyz, dtype=np.float64)
    nuc, avg, counts, centers = infra_nuc(xyz[nuc_idx], lob, params)
    return MetricsReport(
        n_lob=int(dens_idx.shape[0]),
        area=lob.area,
        infra_d=infra_density(dens_idx, lob),
        infra_nuc=nuc,
        nuc_avg=avg,
        disk_counts=tuple(int(c) for c in counts),
        disk_centers=tuple((float(c[0]), float(c[1])) for c in centers),
        n_nuc=int(nuc_idx.shape[0]),
        nuc_params=params,
        nuc_label_filter=tuple(nuc_label_filter) if nuc_label_filter is not None else None,
        density_label_filter=tuple(density_label_filter)
        if density_label_filter is not None else None,
        extras=extras or {},
    )
