# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled BVH traversal with two-sided ray/triangle intersection.

Must stay numerically identical to lidarsynth._kernels.fallback: same slab
handling for zero direction components, same epsilon constants, and the same
(distance, triangle id) tie-break, so either backend can serve any test.
"""

import numpy as np

from libc.math cimport fabs, INFINITY

cdef double EPS_PARALLEL = 1e-12
cdef double EPS_BARY = 1e-10
cdef int STACK_DEPTH = 128


cdef inline bint _slab(const double* bmin, const double* bmax,
                       const double* o, const double* d,
                       double limit) noexcept nogil:
    cdef double tnear = -INFINITY
    cdef double tfar = INFINITY
    cdef double t1, t2, tmp
    cdef int a
    for a in range(3):
        if d[a] == 0.0:
            if o[a] < bmin[a] or o[a] > bmax[a]:
                return False
        else:
            t1 = (bmin[a] - o[a]) / d[a]
            t2 = (bmax[a] - o[a]) / d[a]
            if t1 > t2:
                tmp = t1
                t1 = t2
                t2 = tmp
            if t1 > tnear:
                tnear = t1
            if t2 < tfar:
                tfar = t2
    return tnear <= tfar and tfar >= 0.0 and tnear <= limit


def raycast_kernel(double[:, ::1] node_min, double[:, ::1] node_max,
                   int[::1] node_left, int[::1] node_right,
                   int[::1] node_start, int[::1] node_count,
                   int[::1] prim,
                   double[:, ::1] v0, double[:, ::1] e1, double[:, ::1] e2,
                   double[:, ::1] origins, double[:, ::1] dirs,
                   double max_range, double t_min):
    """Nearest-hit cast for a batch of rays. Returns (t, tri) with inf / -1 misses."""
    cdef Py_ssize_t n_rays = origins.shape[0]
    t_out = np.full(n_rays, np.inf)
    tri_out = np.full(n_rays, -1, dtype=np.int32)
    cdef double[::1] t_view = t_out
    cdef int[::1] tri_view = tri_out

    cdef int stack[128]
    cdef int top, node, i, tid
    cdef Py_ssize_t r
    cdef double o[3]
    cdef double d[3]
    cdef double best_t, limit
    cdef int best_id
    cdef double px, py, pz, det, inv, tx, ty, tz, qx, qy, qz, u, v, t
    cdef const double* a0
    cdef const double* a1
    cdef const double* a2

    with nogil:
        for r in range(n_rays):
            o[0] = origins[r, 0]; o[1] = origins[r, 1]; o[2] = origins[r, 2]
            d[0] = dirs[r, 0]; d[1] = dirs[r, 1]; d[2] = dirs[r, 2]
            best_t = INFINITY
            best_id = -1
            top = 0
            stack[top] = 0
            top += 1
            while top > 0:
                top -= 1
                node = stack[top]
                limit = best_t if best_t < max_range else max_range
                if not _slab(&node_min[node, 0], &node_max[node, 0], o, d, limit):
                    continue
                if node_left[node] < 0:
                    for i in range(node_start[node], node_start[node] + node_count[node]):
                        tid = prim[i]
                        a0 = &v0[tid, 0]; a1 = &e1[tid, 0]; a2 = &e2[tid, 0]
                        # Moller-Trumbore, two-sided
                        px = d[1] * a2[2] - d[2] * a2[1]
                        py = d[2] * a2[0] - d[0] * a2[2]
                        pz = d[0] * a2[1] - d[1] * a2[0]
                        det = a1[0] * px + a1[1] * py + a1[2] * pz
                        if fabs(det) < EPS_PARALLEL:
                            continue
                        inv = 1.0 / det
                        tx = o[0] - a0[0]; ty = o[1] - a0[1]; tz = o[2] - a0[2]
                        u = (tx * px + ty * py + tz * pz) * inv
                        if u < -EPS_BARY or u > 1.0 + EPS_BARY:
                            continue
                        qx = ty * a1[2] - tz * a1[1]
                        qy = tz * a1[0] - tx * a1[2]
                        qz = tx * a1[1] - ty * a1[0]
                        v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv
                        if v < -EPS_BARY or u + v > 1.0 + EPS_BARY:
                            continue
                        t = (a2[0] * qx + a2[1] * qy + a2[2] * qz) * inv
                        if t <= t_min or t > max_range:
                            continue
                        if t < best_t or (t == best_t and tid < best_id):
                            best_t = t
                            best_id = tid
                else:
                    if top + 2 <= STACK_DEPTH:
                        stack[top] = node_right[node]
                        top += 1
                        stack[top] = node_left[node]
                        top += 1
            t_view[r] = best_t
            tri_view[r] = best_id
    return t_out, tri_out
