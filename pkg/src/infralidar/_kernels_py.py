"""Pure-NumPy raycasting kernels (fallback for the compiled extension).

Traversal is packet-style: each BVH node is visited once with the subset of
rays whose interval still overlaps it, so the inner loops stay vectorized.
Hit selection follows the shared rule: strictly nearer wins, equal distance
resolves to the lower original triangle index.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_BARY_EPS = 1e-9  # tolerance on the barycentric boundary
_DET_EPS = 1e-14  # parallel-ray determinant cutoff


def _tri_hit_t(v0, e1, e2, origins, dirs):
    """Möller-Trumbore for one triangle against many rays; -inf marks a miss."""
    pvec = np.cross(dirs, e2[None, :])
    det = pvec @ e1
    ok = np.abs(det) >= _DET_EPS
    inv = np.where(ok, det, 1.0)
    inv = 1.0 / inv
    tvec = origins - v0[None, :]
    u = np.einsum("ij,ij->i", tvec, pvec) * inv
    ok &= (u >= -_BARY_EPS) & (u <= 1.0 + _BARY_EPS)
    qvec = np.cross(tvec, e1[None, :])
    v = np.einsum("ij,ij->i", dirs, qvec) * inv
    ok &= (v >= -_BARY_EPS) & (u + v <= 1.0 + _BARY_EPS)
    t = (qvec @ e2) * inv
    return np.where(ok, t, -np.inf)


def _aabb_overlap(bmin, bmax, origins, dirs, t_lo, t_hi):
    """Slab test: does [t_lo, t_hi] overlap the node for each ray?"""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t1 = (bmin[None, :] - origins) * inv
        t2 = (bmax[None, :] - origins) * inv
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    # Rays parallel to a slab: inside -> interval unconstrained, outside -> miss.
    par = dirs == 0.0
    if par.any():
        inside = (origins >= bmin[None, :]) & (origins <= bmax[None, :])
        lo = np.where(par, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(par, np.where(inside, np.inf, -np.inf), hi)
    tn = np.maximum(lo.max(axis=1), t_lo)
    tf = np.minimum(hi.min(axis=1), t_hi)
    return tn <= tf


def bvh_cast(node_min, node_max, node_left, node_right, node_start, node_count,
             order, tri_v0, tri_e1, tri_e2, origins, dirs, t_min, t_max):
    """Nearest-hit cast for a batch of rays.

    Returns ``(tri, t)`` where ``tri`` is the original triangle index
    (-1 for a miss) and ``t`` the hit parameter in ``(t_min, t_max]``.
    """
    n = origins.shape[0]
    best_t = np.full(n, np.inf)
    best_tri = np.full(n, -1, dtype=np.int32)
    if order.shape[0] == 0 or n == 0:
        return best_tri, best_t

    stack = [(0, np.arange(n))]
    while stack:
        node, rays = stack.pop()
        bound = np.minimum(best_t[rays], t_max)
        alive = _aabb_overlap(node_min[node], node_max[node],
                              origins[rays], dirs[rays], t_min, bound)
        rays = rays[alive]
        if rays.size == 0:
            continue
        left = node_left[node]
        if left >= 0:
            stack.append((left, rays))
            stack.append((node_right[node], rays))
            continue
        start = node_start[node]
        o = origins[rays]
        d = dirs[rays]
        for j in range(start, start + node_count[node]):
            tri = int(order[j])
            t = _tri_hit_t(tri_v0[tri], tri_e1[tri], tri_e2[tri], o, d)
            valid = (t > t_min) & (t <= t_max)
            better = valid & ((t < best_t[rays]) |
                              ((t == best_t[rays]) & (tri < best_tri[rays])))
            if better.any():
                upd = rays[better]
                best_t[upd] = t[better]
                best_tri[upd] = tri
    return best_tri, best_t
