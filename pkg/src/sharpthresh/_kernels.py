"""numba inner loops: union-find, cluster counts, heat-bath sweeps, crossings.

Torus edge layout (side L): horizontal edge (x,y)-(x+1,y) has index y*L + x,
vertical edge (x,y)-(x,y+1) has index L*L + y*L + x, coordinates mod L.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(cache=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return False
    if ra < rb:
        parent[rb] = ra
    else:
        parent[ra] = rb
    return True


@njit(cache=True)
def cluster_count(n_vertices, eu, ev, omega):
    parent = np.arange(n_vertices)
    k = n_vertices
    for e in range(eu.shape[0]):
        if omega[e]:
            if _union(parent, eu[e], ev[e]):
                k -= 1
    return k


@njit(cache=True)
def all_cluster_counts(n_vertices, eu, ev):
    """k(w) for every configuration w of the edge set, indexed by bit pattern."""
    m = eu.shape[0]
    out = np.empty(1 << m, dtype=np.int16)
    parent = np.empty(n_vertices, dtype=np.int64)
    for w in range(1 << m):
        for v in range(n_vertices):
            parent[v] = v
        k = n_vertices
        for e in range(m):
            if (w >> e) & 1:
                if _union(parent, eu[e], ev[e]):
                    k -= 1
        out[w] = k
    return out


@njit(cache=True)
def connected_off(n_vertices, eu, ev, omega, e, parent):
    """Are the endpoints of edge e joined by open edges other than e? Rebuilds union-find."""
    for v in range(n_vertices):
        parent[v] = v
    for f in range(eu.shape[0]):
        if f != e and omega[f]:
            _union(parent, eu[f], ev[f])
    return _find(parent, eu[e]) == _find(parent, ev[e])


@njit(cache=True)
def heat_bath_run(n_vertices, eu, ev, omega, p_connected, p_disconnected, edges, uniforms):
    """Apply heat-bath updates at ``edges[t]`` with uniforms ``uniforms[t]``, in place."""
    parent = np.empty(n_vertices, dtype=np.int64)
    for t in range(edges.shape[0]):
        e = edges[t]
        if connected_off(n_vertices, eu, ev, omega, e, parent):
            omega[e] = 1 if uniforms[t] < p_connected else 0
        else:
            omega[e] = 1 if uniforms[t] < p_disconnected else 0


@njit(cache=True)
def connected_off_table(n_vertices, eu, ev):
    """conn[w, e] for every configuration w (bit pattern) and edge e."""
    m = eu.shape[0]
    out = np.zeros((1 << m, m), dtype=np.bool_)
    omega = np.zeros(m, dtype=np.uint8)
    parent = np.empty(n_vertices, dtype=np.int64)
    for w in range(1 << m):
        for f in range(m):
            omega[f] = (w >> f) & 1
        for e in range(m):
            out[w, e] = connected_off(n_vertices, eu, ev, omega, e, parent)
    return out


# ------------------------------------------------------------------ crossings

@njit(cache=True)
def rect_crossing(omega, L, x0, y0, w, h, vertical):
    """Open crossing of the rectangle [x0, x0+w] x [y0, y0+h] using only edges inside it.

    ``vertical`` False joins the left side to the right side, True joins
    bottom to top. Coordinates wrap mod L; the rectangle must satisfy
    w < L and h < L.
    """
    nx_ = w + 1
    ny_ = h + 1
    parent = np.arange(nx_ * ny_)
    LL = L * L
    for j in range(ny_):
        y = (y0 + j) % L
        for i in range(w):
            x = (x0 + i) % L
            if omega[y * L + x]:
                _union(parent, j * nx_ + i, j * nx_ + i + 1)
    for j in range(h):
        y = (y0 + j) % L
        for i in range(nx_):
            x = (x0 + i) % L
            if omega[LL + y * L + x]:
                _union(parent, j * nx_ + i, (j + 1) * nx_ + i)
    mark = np.zeros(nx_ * ny_, dtype=np.bool_)
    if vertical:
        for i in range(nx_):
            mark[_find(parent, i)] = True
        for i in range(nx_):
            if mark[_find(parent, h * nx_ + i)]:
                return True
    else:
        for j in range(ny_):
            mark[_find(parent, j * nx_)] = True
        for j in range(ny_):
            if mark[_find(parent, j * nx_ + w)]:
                return True
    return False


@njit(cache=True)
def translate_crossing_fraction(omega, L, w, h, vertical):
    """Fraction of the L*L translates of a w x h rectangle that are crossed."""
    c = 0
    for y0 in range(L):
        for x0 in range(L):
            if rect_crossing(omega, L, x0, y0, w, h, vertical):
                c += 1
    return c / (L * L)


@njit(cache=True)
def square_crossing_anywhere(omega, L, s):
    """Some translate of the s x s square has a left-right or top-bottom crossing."""
    for y0 in range(L):
        for x0 in range(L):
            if rect_crossing(omega, L, x0, y0, s, s, False):
                return True
            if rect_crossing(omega, L, x0, y0, s, s, True):
                return True
    return False


@njit(cache=True)
def any_rect_crossed(omega, L, xs, ys, w, h, vertical):
    for a in range(xs.shape[0]):
        if rect_crossing(omega, L, xs[a], ys[a], w, h, vertical):
            return True
    return False


@njit(cache=True)
def config_from_bits(w, m, out):
    for e in range(m):
        out[e] = (w >> e) & 1
