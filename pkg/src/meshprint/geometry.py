"""Planar polygon helpers used by the slicer and the toolpath planner.

Polygons are ``(n, 2)`` float arrays, implicitly closed (last vertex joins the
first).  Counter-clockwise polygons have positive signed area.
"""
from __future__ import annotations

import numpy as np

from . import kernels


def as_polygon(points) -> np.ndarray:
    return np.asarray(points, dtype=np.float64).reshape(-1, 2)


def signed_area(poly) -> float:
    p = as_polygon(poly)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    # shoelace on coordinates relative to the first vertex to limit cancellation
    x = x - x[0]
    y = y - y[0]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def perimeter(poly) -> float:
    p = as_polygon(poly)
    return float(np.hypot(*(np.roll(p, -1, axis=0) - p).T).sum())


def points_in_polygon(points, poly) -> np.ndarray:
    """Even-odd test for many points against one polygon.

    Points exactly on an edge may land on either side; callers that care test
    points away from the boundary.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    p = as_polygon(poly)
    x1, y1 = p[:, 0], p[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    straddle = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
    hits = straddle & (px < xcross)
    return (hits.sum(axis=1) % 2) == 1


def point_in_polygon(point, poly) -> bool:
    return bool(points_in_polygon([point], poly)[0])


def first_crossing(poly) -> tuple[int, int]:
    """Indices of the first pair of non-adjacent edges that meet, or (-1, -1)."""
    p = np.ascontiguousarray(as_polygon(poly))
    if len(p) < 4:
        return -1, -1
    return kernels.first_crossing(p)


def is_simple(poly) -> bool:
    return first_crossing(poly) == (-1, -1)


def rotate_to_lexmin(poly) -> np.ndarray:
    """Rotate the vertex cycle so the lexicographically smallest vertex is first."""
    p = as_polygon(poly)
    if len(p) == 0:
        return p
    start = int(np.lexsort((p[:, 1], p[:, 0]))[0])
    return np.roll(p, -start, axis=0)


def drop_collinear(poly, rel_tol=1e-12) -> np.ndarray:
    """Remove repeated vertices and vertices lying on the line through their neighbours."""
    p = as_polygon(poly)
    changed = True
    while changed and len(p) >= 3:
        changed = False
        prev = np.roll(p, 1, axis=0)
        nxt = np.roll(p, -1, axis=0)
        a = p - prev
        b = nxt - p
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        scale = np.hypot(*a.T) * np.hypot(*b.T)
        bad = np.abs(cross) <= rel_tol * scale
        if bad.any():
            # drop every other flagged vertex per pass so neighbours are re-examined
            idx = np.nonzero(bad)[0]
            keep = np.ones(len(p), dtype=bool)
            last = -2
            for i in idx:
                if i != last + 1:
                    keep[i] = False
                    last = i
            p = p[keep]
            changed = True
    return p


def offset_polygon(poly, distance: float, miter_limit: float = 4.0):
    """Offset every edge ``distance`` to its left and re-join with miters.

    For a counter-clockwise outline a positive distance shrinks it; for a
    clockwise hole it grows the hole.  Edges that flip direction (because the
    offset swallowed them) are removed and their neighbours re-joined.  Returns
    ``None`` when the result vanishes or is not a simple polygon.  Joins whose
    miter would exceed ``miter_limit * distance`` are bevelled.
    """
    p = drop_collinear(poly)
    if len(p) < 3:
        return None
    orig_sign = np.sign(signed_area(p))
    # one offset line per edge: point + direction
    starts = p.copy()
    ends = np.roll(p, -1, axis=0)
    for _ in range(len(p)):
        d = ends - starts
        length = np.hypot(d[:, 0], d[:, 1])
        u = d / length[:, None]
        normal = np.stack([-u[:, 1], u[:, 0]], axis=1)
        base = starts + distance * normal
        verts, ok = _miter(base, u, distance, miter_limit)
        if verts is None:
            return None
        if ok.all():
            break
        keep = ok
        if keep.sum() < 3:
            return None
        starts, ends = starts[keep], ends[keep]
    else:
        return None
    out = drop_collinear(verts)
    if len(out) < 3:
        return None
    area = signed_area(out)
    if np.sign(area) != orig_sign or abs(area) < 1e-12:
        return None
    if not is_simple(out):
        return None
    return out


def _miter(base, u, distance, miter_limit):
    """Join consecutive offset lines; report which offset edges kept their direction."""
    n = len(base)
    j = np.roll(np.arange(n), 1)
    uj = u[j]
    normal = np.stack([-u[:, 1], u[:, 0]], axis=1)
    # intersect line j (base[j] + s*u[j]) with line i (base[i] + t*u[i])
    denom = uj[:, 0] * u[:, 1] - uj[:, 1] * u[:, 0]
    parallel = np.abs(denom) < 1e-12
    diff = base - base[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (diff[:, 0] * u[:, 1] - diff[:, 1] * u[:, 0]) / denom
    pt = np.where(parallel[:, None], base, base[j] + s[:, None] * uj)
    shared = base - distance * normal
    bevel = ~parallel & (np.hypot(*(pt - shared).T) > miter_limit * abs(distance))
    # a bevel replaces the corner by the end of edge j followed by the start of edge i
    end_j = shared + distance * normal[j]
    first = np.cumsum(1 + bevel) - (1 + bevel)
    total = n + int(bevel.sum())
    verts = np.empty((total, 2))
    owners = np.empty(total, dtype=np.int64)
    idx = np.arange(n)
    verts[first] = np.where(bevel[:, None], end_j, pt)
    owners[first] = np.where(bevel, -1, idx)
    verts[first[bevel] + 1] = base[bevel]
    owners[first[bevel] + 1] = idx[bevel]
    # the offset edge i runs from its corner to the next corner; it must still point along u[i]
    seg = np.roll(verts, -1, axis=0) - verts
    own = owners >= 0
    along = np.einsum("ij,ij->i", seg[own], u[owners[own]])
    ok = np.ones(n, dtype=bool)
    ok[owners[own][along <= 0.0]] = False
    return verts, ok


def scanline_intervals(polys, y: float) -> list[tuple[float, float]]:
    """Inside-intervals of the horizontal line at ``y`` under the even-odd rule."""
    xs = []
    for poly in polys:
        p = as_polygon(poly)
        x1, y1 = p[:, 0], p[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        # half-open rule so a vertex on the line is counted once
        hit = (y1 <= y) != (y2 <= y)
        if hit.any():
            t = (y - y1[hit]) / (y2[hit] - y1[hit])
            xs.extend((x1[hit] + t * (x2[hit] - x1[hit])).tolist())
    xs.sort()
    return [(xs[k], xs[k + 1]) for k in range(0, len(xs) - 1, 2) if xs[k + 1] > xs[k]]


def bounding_box(polys):
    pts = [as_polygon(p) for p in polys if len(p)]
    if not pts:
        return None
    allp = np.vstack(pts)
    return (float(allp[:, 0].min()), float(allp[:, 1].min()),
            float(allp[:, 0].max()), float(allp[:, 1].max()))
