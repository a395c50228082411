"""Reference implementations of the hot loops in ``_ckernels.pyx``.

Same inputs, same outputs, bit for bit: every floating-point expression here is
evaluated in the same order as in the compiled module.
"""
import numpy as np


def _cross(tris, idx, lo, hi, z):
    # lo strictly below z, hi at or above it
    zb = tris[idx, lo, 2]
    t = (z - zb) / (tris[idx, hi, 2] - zb)
    x = tris[idx, lo, 0] + t * (tris[idx, hi, 0] - tris[idx, lo, 0])
    y = tris[idx, lo, 1] + t * (tris[idx, hi, 1] - tris[idx, lo, 1])
    return x, y


def slice_facets(tris, z):
    """Segments where each triangle crosses the plane at ``z``; shape (m, 2, 2)."""
    tris = np.ascontiguousarray(tris, dtype=np.float64)
    z = float(z)
    up = tris[:, :, 2] >= z
    nabove = up.sum(axis=1)
    idx = np.nonzero((nabove == 1) | (nabove == 2))[0]
    if idx.size == 0:
        return np.empty((0, 2, 2))
    up = up[idx]
    lonely = np.where((nabove[idx] == 1)[:, None], up, ~up)
    # the compiled loop keeps the last matching vertex; there is exactly one
    odd = np.argmax(lonely, axis=1)
    a = (odd + 1) % 3
    b = (odd + 2) % 3
    odd_up = up[np.arange(idx.size), odd]
    lo_a = np.where(odd_up, a, odd)
    hi_a = np.where(odd_up, odd, a)
    lo_b = np.where(odd_up, b, odd)
    hi_b = np.where(odd_up, odd, b)
    px, py = _cross(tris, idx, lo_a, hi_a, z)
    qx, qy = _cross(tris, idx, lo_b, hi_b, z)
    keep = ~((px == qx) & (py == qy))
    seg = np.stack([px, py, qx, qy], axis=1)[keep]
    return seg.reshape(-1, 2, 2)


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _between(a, b, c):
    return ((a <= c) & (c <= b)) | ((b <= c) & (c <= a))


def first_crossing(pts):
    """First pair (i, j), i < j, of non-adjacent edges of the closed polygon
    ``pts`` that touch or cross; (-1, -1) when the polygon is simple."""
    pts = np.asarray(pts, dtype=np.float64)
    n = len(pts)
    nxt = np.roll(pts, -1, axis=0)
    for i in range(n):
        stop = n - 1 if i == 0 else n
        if i + 2 >= stop:
            continue
        ax, ay = pts[i]
        bx, by = nxt[i]
        c = pts[i + 2:stop]
        d = nxt[i + 2:stop]
        cx, cy, dx, dy = c[:, 0], c[:, 1], d[:, 0], d[:, 1]
        d1 = _orient(cx, cy, dx, dy, ax, ay)
        d2 = _orient(cx, cy, dx, dy, bx, by)
        d3 = _orient(ax, ay, bx, by, cx, cy)
        d4 = _orient(ax, ay, bx, by, dx, dy)
        proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
            ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0)))
        touch = (
            ((d1 == 0) & _between(cx, dx, ax) & _between(cy, dy, ay))
            | ((d2 == 0) & _between(cx, dx, bx) & _between(cy, dy, by))
            | ((d3 == 0) & _between(ax, bx, cx) & _between(ay, by, cy))
            | ((d4 == 0) & _between(ax, bx, dx) & _between(ay, by, dy))
        )
        hit = np.nonzero(proper | touch)[0]
        if hit.size:
            return i, int(i + 2 + hit[0])
    return -1, -1
