# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  ``_pykernels`` holds the reference versions; both must
produce bit-identical results, so keep the arithmetic in the same order."""
import numpy as np


cdef inline void _cross(const double[:, :, ::1] tris, Py_ssize_t f, int lo, int hi,
                        double z, double *x, double *y) noexcept nogil:
    # lo is strictly below z, hi is at or above it
    cdef double zb = tris[f, lo, 2]
    cdef double t = (z - zb) / (tris[f, hi, 2] - zb)
    x[0] = tris[f, lo, 0] + t * (tris[f, hi, 0] - tris[f, lo, 0])
    y[0] = tris[f, lo, 1] + t * (tris[f, hi, 1] - tris[f, lo, 1])


def slice_facets(const double[:, :, ::1] tris, double z):
    """Segments where each triangle crosses the plane at ``z``; shape (m, 2, 2)."""
    cdef Py_ssize_t n = tris.shape[0]
    out = np.empty((n, 4), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t f, m = 0
    cdef int k, a, b, nabove, odd
    cdef bint up[3]
    cdef double px, py, qx, qy
    with nogil:
        for f in range(n):
            nabove = 0
            for k in range(3):
                up[k] = tris[f, k, 2] >= z
                nabove += up[k]
            if nabove == 0 or nabove == 3:
                continue
            odd = 0
            for k in range(3):
                if (nabove == 1 and up[k]) or (nabove == 2 and not up[k]):
                    odd = k
            a = (odd + 1) % 3
            b = (odd + 2) % 3
            if up[odd]:
                _cross(tris, f, a, odd, z, &px, &py)
                _cross(tris, f, b, odd, z, &qx, &qy)
            else:
                _cross(tris, f, odd, a, z, &px, &py)
                _cross(tris, f, odd, b, z, &qx, &qy)
            if px == qx and py == qy:
                continue
            o[m, 0] = px
            o[m, 1] = py
            o[m, 2] = qx
            o[m, 3] = qy
            m += 1
    return out[:m].reshape(m, 2, 2)


cdef inline double _orient(double ax, double ay, double bx, double by,
                           double cx, double cy) noexcept nogil:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


cdef inline bint _between(double a, double b, double c) noexcept nogil:
    return (a <= c <= b) or (b <= c <= a)


cdef bint _segments_meet(double ax, double ay, double bx, double by,
                         double cx, double cy, double dx, double dy) noexcept nogil:
    cdef double d1 = _orient(cx, cy, dx, dy, ax, ay)
    cdef double d2 = _orient(cx, cy, dx, dy, bx, by)
    cdef double d3 = _orient(ax, ay, bx, by, cx, cy)
    cdef double d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _between(cx, dx, ax) and _between(cy, dy, ay):
        return True
    if d2 == 0 and _between(cx, dx, bx) and _between(cy, dy, by):
        return True
    if d3 == 0 and _between(ax, bx, cx) and _between(ay, by, cy):
        return True
    if d4 == 0 and _between(ax, bx, dx) and _between(ay, by, dy):
        return True
    return False


def first_crossing(const double[:, ::1] pts):
    """First pair (i, j), i < j, of non-adjacent edges of the closed polygon
    ``pts`` that touch or cross; (-1, -1) when the polygon is simple."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t i, j, i2, j2
    cdef Py_ssize_t ri = -1, rj = -1
    cdef double ax, ay, bx, by, cx, cy, dx, dy
    cdef double minx, maxx, miny, maxy
    with nogil:
        for i in range(n):
            i2 = (i + 1) % n
            ax = pts[i, 0]; ay = pts[i, 1]; bx = pts[i2, 0]; by = pts[i2, 1]
            minx = ax if ax < bx else bx
            maxx = bx if ax < bx else ax
            miny = ay if ay < by else by
            maxy = by if ay < by else ay
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                j2 = (j + 1) % n
                cx = pts[j, 0]; cy = pts[j, 1]; dx = pts[j2, 0]; dy = pts[j2, 1]
                if (cx < minx and dx < minx) or (cx > maxx and dx > maxx):
                    continue
                if (cy < miny and dy < miny) or (cy > maxy and dy > maxy):
                    continue
                if _segments_meet(ax, ay, bx, by, cx, cy, dx, dy):
                    ri = i
                    rj = j
                    break
            if ri >= 0:
                break
    return int(ri), int(rj)
