"""Specular ghost resolution.

A beam that hits a sufficiently smooth surface may be redirected once; if
the reflected segment finds a second object at distance b, the receiver
books a return at total path a+b along the original ray, mirror-symmetric
to the true secondary hit. Triggered beams whose reflected ray escapes
produce no return at all.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .scene import Hit, Label, Scene, cast_ray, hit_from_cast

REFLECT_T_MIN = 1e-4  # m, self-intersection offset off the glossy surface


@dataclass(frozen=True)
class GhostConfig:
    enabled: bool = False
    smoothness_threshold: float = 0.9
    trigger_ratio: float = 0.5  # share of glossy hits that redirect
    max_bounces: int = 1  # single specular redirection only

    def __post_init__(self):
        if not (0.0 <= self.smoothness_threshold <= 1.0):
            raise ContractViolationError("smoothness_threshold must be in [0, 1]")
        if not (0.0 <= self.trigger_ratio <= 1.0):
            raise ContractViolationError("trigger_ratio must be in [0, 1]")
        if self.max_bounces != 1:
            raise ContractViolationError("only single-bounce ghosting is supported")


class GhostKind(enum.Enum):
    REAL = "real"
    GHOST = "ghost"
    NO_RETURN = "no_return"


@dataclass(frozen=True)
class GhostOutcome:
    """Resolved return for one beam.

    ``a`` is the first-hit distance; ``b`` the reflected-segment distance
    (ghost outcomes only). ``position`` is the reported point, which for a
    ghost lies at a+b along the original ray.
    """

    kind: GhostKind
    a: float
    b: float | None
    position: np.ndarray | None
    surface_id: int | None
    label: Label | None
    reflectivity: float | None


def reflect(direction: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Mirror ``direction`` about the surface ``normal``."""
    return direction - 2.0 * float(direction @ normal) * normal


def _real(hit: Hit, scene: Scene) -> GhostOutcome:
    surf = scene.surfaces[hit.surface_id]
    return GhostOutcome(GhostKind.REAL, a=hit.distance, b=None, position=hit.position,
                        surface_id=hit.surface_id, label=surf.label,
                        reflectivity=surf.reflectivity)


def resolve_hit(scene: Scene, origin: np.ndarray, direction: np.ndarray,
                first_hit: Hit, config: GhostConfig,
                rng: np.random.Generator) -> GhostOutcome:
    """Resolve one first hit into a real point, a ghost point, or no return.

    The uniform trigger draw is consumed only when the surface is glossy
    (smoothness above threshold) and ghosting is enabled.
    """
    surf = scene.surfaces[first_hit.surface_id]
    if not config.enabled or surf.smoothness <= config.smoothness_threshold:
        return _real(first_hit, scene)
    u = float(rng.uniform())
    if u >= config.trigger_ratio:
        return _real(first_hit, scene)
    d2 = reflect(np.asarray(direction, dtype=np.float64), first_hit.normal)
    d2 = d2 / np.linalg.norm(d2)
    second = cast_ray(scene, first_hit.position, d2, t_min=REFLECT_T_MIN, t_max=np.inf)
    if second is None:
        return GhostOutcome(GhostKind.NO_RETURN, a=first_hit.distance, b=None,
                            position=None, surface_id=None, label=None, reflectivity=None)
    surf2 = scene.surfaces[second.surface_id]
    total = first_hit.distance + second.distance
    position = np.asarray(origin, dtype=np.float64) + total * np.asarray(direction, dtype=np.float64)
    return GhostOutcome(GhostKind.GHOST, a=first_hit.distance, b=second.distance,
                        position=position, surface_id=second.surface_id,
                        label=surf2.label, reflectivity=surf2.reflectivity)


def resolve_batch(scene: Scene, origins: np.ndarray, dirs: np.ndarray,
                  tri: np.ndarray, t: np.ndarray, config: GhostConfig,
                  trigger_u: np.ndarray, t_max: float):
    """Vectorized ghost resolution for a cast batch.

    ``trigger_u`` supplies one pre-drawn uniform per beam so the outcome of
    beam i never depends on any other beam. Returns per-beam arrays:
    keep mask, reported distance, surface id, and ghost flag.
    """
    n = tri.shape[0]
    keep = tri >= 0
    distance = np.where(keep, t, np.inf)
    surface = np.full(n, -1, dtype=np.int32)
    is_ghost = np.zeros(n, dtype=bool)
    if not keep.any():
        return keep, distance, surface, is_ghost
    surface[keep] = scene.tri_surface[tri[keep]]
    if not config.enabled:
        return keep, distance, surface, is_ghost

    smooth = np.zeros(n)
    smooth[keep] = scene.surface_smoothness[surface[keep]]
    triggered = keep & (smooth > config.smoothness_threshold) & (trigger_u < config.trigger_ratio)
    if not triggered.any():
        return keep, distance, surface, is_ghost

    sel = np.nonzero(triggered)[0]
    d = dirs[sel]
    hit_pos = origins[sel] + t[sel, None] * d
    normals = scene.tri_normal[tri[sel]]
    flip = np.einsum("ij,ij->i", normals, d) > 0.0
    normals = np.where(flip[:, None], -normals, normals)
    d2 = d - 2.0 * np.einsum("ij,ij->i", d, normals)[:, None] * normals
    d2 /= np.linalg.norm(d2, axis=1)[:, None]
    from .scene import cast_rays
    tri2, t2 = cast_rays(scene, hit_pos, d2, t_min=REFLECT_T_MIN, t_max=t_max)
    found = tri2 >= 0

    # Escaped reflections drop the beam entirely.
    keep = keep.copy()
    keep[sel[~found]] = False
    ok = sel[found]
    distance[ok] = t[ok] + t2[found]
    surface[ok] = scene.tri_surface[tri2[found]]
    is_ghost[ok] = True
    return keep, distance, surface, is_ghost
