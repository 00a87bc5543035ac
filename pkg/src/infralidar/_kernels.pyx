# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled raycasting kernels: per-ray stack traversal of the flat BVH.

Hit selection matches the pure-Python kernel exactly: strictly nearer wins,
equal distance resolves to the lower original triangle index.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs

cnp.import_array()

BACKEND_NAME = "cython"

cdef double BARY_EPS = 1e-9   # tolerance on the barycentric boundary
cdef double DET_EPS = 1e-14   # parallel-ray determinant cutoff
DEF STACK_CAP = 128


cdef inline bint _aabb_overlap(const double* bmin, const double* bmax,
                               const double* o, const double* d,
                               double t_lo, double t_hi) noexcept nogil:
    cdef double tn = t_lo
    cdef double tf = t_hi
    cdef double t1, t2, tmp
    cdef int k
    for k in range(3):
        if d[k] != 0.0:
            t1 = (bmin[k] - o[k]) / d[k]
            t2 = (bmax[k] - o[k]) / d[k]
            if t1 > t2:
                tmp = t1; t1 = t2; t2 = tmp
            if t1 > tn:
                tn = t1
            if t2 < tf:
                tf = t2
            if tn > tf:
                return False
        elif o[k] < bmin[k] or o[k] > bmax[k]:
            return False
    return True


cdef inline double _tri_hit_t(const double* v0, const double* e1, const double* e2,
                              const double* o, const double* d) noexcept nogil:
    cdef double px = d[1] * e2[2] - d[2] * e2[1]
    cdef double py = d[2] * e2[0] - d[0] * e2[2]
    cdef double pz = d[0] * e2[1] - d[1] * e2[0]
    cdef double det = e1[0] * px + e1[1] * py + e1[2] * pz
    if fabs(det) < DET_EPS:
        return -INFINITY
    cdef double inv = 1.0 / det
    cdef double tx = o[0] - v0[0]
    cdef double ty = o[1] - v0[1]
    cdef double tz = o[2] - v0[2]
    cdef double u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return -INFINITY
    cdef double qx = ty * e1[2] - tz * e1[1]
    cdef double qy = tz * e1[0] - tx * e1[2]
    cdef double qz = tx * e1[1] - ty * e1[0]
    cdef double v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return -INFINITY
    return (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv


def bvh_cast(const double[:, ::1] node_min, const double[:, ::1] node_max,
             const int[::1] node_left, const int[::1] node_right,
             const int[::1] node_start, const int[::1] node_count,
             const int[::1] order,
             const double[:, ::1] tri_v0, const double[:, ::1] tri_e1,
             const double[:, ::1] tri_e2,
             const double[:, ::1] origins, const double[:, ::1] dirs,
             double t_min, double t_max):
    """Nearest-hit cast for a batch of rays; returns (tri, t) arrays."""
    cdef Py_ssize_t n = origins.shape[0]
    out_tri_arr = np.full(n, -1, dtype=np.int32)
    out_t_arr = np.full(n, np.inf, dtype=np.float64)
    cdef int[::1] out_tri = out_tri_arr
    cdef double[::1] out_t = out_t_arr
    if order.shape[0] == 0 or n == 0:
        return out_tri_arr, out_t_arr

    cdef int stack[STACK_CAP]
    cdef int top, node, left, j, tri, best_tri
    cdef Py_ssize_t i
    cdef double best_t, bound, t
    cdef const double* o
    cdef const double* d

    with nogil:
        for i in range(n):
            o = &origins[i, 0]
            d = &dirs[i, 0]
            best_t = INFINITY
            best_tri = -1
            top = 0
            stack[top] = 0
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                bound = best_t if best_t < t_max else t_max
                if not _aabb_overlap(&node_min[node, 0], &node_max[node, 0],
                                     o, d, t_min, bound):
                    continue
                left = node_left[node]
                if left >= 0:
                    stack[top] = left
                    top += 1
                    stack[top] = node_right[node]
                    top += 1
                    continue
                for j in range(node_start[node], node_start[node] + node_count[node]):
                    tri = order[j]
                    t = _tri_hit_t(&tri_v0[tri, 0], &tri_e1[tri, 0], &tri_e2[tri, 0], o, d)
                    if t > t_min and t <= t_max:
                        if t < best_t or (t == best_t and tri < best_tri):
                            best_t = t
                            best_tri = tri
            out_tri[i] = best_tri
            out_t[i] = best_t
    return out_tri_arr, out_t_arr
