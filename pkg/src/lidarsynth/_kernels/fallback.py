"""Pure numpy BVH raycast, used when the compiled core is unavailable.

Rays are traversed as packets: each node processes the subset of rays whose
slab interval is still open, so the Python-level work scales with node visits
rather than with rays x triangles. Numerics mirror _core.pyx exactly: same
epsilons, same zero-direction slab handling, same (t, id) tie-break, and
explicit componentwise arithmetic so both backends round identically.
"""

from __future__ import annotations

import numpy as np

EPS_PARALLEL = 1e-12
EPS_BARY = 1e-10


def _dot3(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _cross3(a, b):
    out = np.empty(np.broadcast(a, b).shape)
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def moller_trumbore(origins, dirs, v0, e1, e2, max_range, t_min):
    """Two-sided intersection of rays (n, 3) against triangles (m, 3).

    Returns an (n, m) distance matrix with inf where there is no valid hit.
    """
    o = origins[:, None, :]
    d = dirs[:, None, :]
    pvec = _cross3(d, e2[None, :, :])
    det = _dot3(e1[None, :, :], pvec)
    parallel = np.abs(det) < EPS_PARALLEL
    inv = 1.0 / np.where(parallel, 1.0, det)
    tvec = o - v0[None, :, :]
    u = _dot3(tvec, pvec) * inv
    qvec = _cross3(tvec, e1[None, :, :])
    v = _dot3(d, qvec) * inv
    t = _dot3(e2[None, :, :], qvec) * inv
    ok = (~parallel
          & (u >= -EPS_BARY) & (u <= 1.0 + EPS_BARY)
          & (v >= -EPS_BARY) & (u + v <= 1.0 + EPS_BARY)
          & (t > t_min) & (t <= max_range))
    return np.where(ok, t, np.inf)


def _slab_mask(bmin, bmax, o, d, limit):
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (bmin - o) / d
        t2 = (bmax - o) / d
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    zero = d == 0.0
    if zero.any():
        inside = (o >= bmin) & (o <= bmax)
        lo = np.where(zero, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(zero, np.where(inside, np.inf, -np.inf), hi)
    tnear = lo.max(axis=1)
    tfar = hi.min(axis=1)
    return (tnear <= tfar) & (tfar >= 0.0) & (tnear <= limit)


def raycast_kernel(node_min, node_max, node_left, node_right,
                   node_start, node_count, prim, v0, e1, e2,
                   origins, dirs, max_range, t_min):
    """Nearest-hit cast for a batch of rays. Returns (t, tri) with inf / -1 misses."""
    n_rays = origins.shape[0]
    best_t = np.full(n_rays, np.inf)
    best_id = np.full(n_rays, -1, dtype=np.int32)
    if n_rays == 0:
        return best_t, best_id

    stack = [(0, np.arange(n_rays))]
    while stack:
        node, rays = stack.pop()
        o = origins[rays]
        d = dirs[rays]
        limit = np.minimum(best_t[rays], max_range)
        alive = _slab_mask(node_min[node], node_max[node], o, d, limit)
        if not alive.any():
            continue
        rays = rays[alive]
        if node_left[node] < 0:
            s, c = node_start[node], node_count[node]
            ids = prim[s:s + c]                      # ascending triangle ids
            t = moller_trumbore(origins[rays], dirs[rays],
                                v0[ids], e1[ids], e2[ids], max_range, t_min)
            col = np.argmin(t, axis=1)               # first min = lowest id
            t_leaf = t[np.arange(len(rays)), col]
            id_leaf = ids[col].astype(np.int32)
            upd = (t_leaf < best_t[rays]) | ((t_leaf == best_t[rays])
                                             & (id_leaf < best_id[rays]))
            sel = rays[upd]
            best_t[sel] = t_leaf[upd]
            best_id[sel] = id_leaf[upd]
        else:
            stack.append((node_right[node], rays))
            stack.append((node_left[node], rays))
    return best_t, best_id
