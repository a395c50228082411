"""Extruder plans: perimeters, rectilinear infill, raft, supports and travel ordering.

Each layer's nozzle height is the top of the layer: a slice taken at plane z
prints at ``z + layer_thickness/2``, lifted by the raft when there is one.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import geometry
from .errors import DiscontinuousPath
from .slicer import Layer


@dataclass(frozen=True)
class PrintConfig:
    layer_thickness: float = 0.2
    extrusion_width: float = 0.4
    filament_diameter: float = 1.75
    fill_fraction: float = 0.2
    raft_layers: int = 0
    support_overhang_deg: float = 45.0
    travel_speed: float = 4800.0
    extrude_speed: float = 1800.0
    extruder_temp: float = 230.0
    raft_margin: float = 3.0

    def __post_init__(self):
        for name in ("layer_thickness", "extrusion_width", "filament_diameter", "travel_speed",
                     "extrude_speed", "extruder_temp", "raft_margin"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive, got {v}")
        if not 0 <= self.fill_fraction <= 1:
            raise ValueError(f"fill_fraction must be in [0, 1], got {self.fill_fraction}")
        if self.raft_layers < 0 or int(self.raft_layers) != self.raft_layers:
            raise ValueError(f"raft_layers must be a non-negative integer, got {self.raft_layers}")
        if not 0 < self.support_overhang_deg < 90:
            raise ValueError(f"support_overhang_deg must be in (0, 90), got {self.support_overhang_deg}")
        object.__setattr__(self, "raft_layers", int(self.raft_layers))

    @property
    def filament_area(self) -> float:
        return math.pi * (self.filament_diameter / 2) ** 2

    def filament_for(self, path_length: float) -> float:
        """Filament length that deposits a bead of this length, width and thickness."""
        return path_length * self.extrusion_width * self.layer_thickness / self.filament_area

    def updated(self, **changes):
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def parse_profile(text: str) -> dict:
    """``key = value`` lines naming :class:`PrintConfig` fields; ``#`` starts a comment."""
    known = {f.name: f.type for f in fields(PrintConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in known:
            raise ValueError(f"profile line {lineno}: expected '<field> = <value>' with a PrintConfig field, got {raw!r}")
        try:
            out[key] = int(value) if known[key] in ("int", int) else float(value)
        except ValueError:
            raise ValueError(f"profile line {lineno}: bad value {value.strip()!r} for {key}") from None
    return out


@dataclass(frozen=True)
class Move:
    kind: str            # "travel" | "extrude"
    start: tuple
    end: tuple
    z: float
    feed: float
    extrusion: float = 0.0
    role: str = "travel"  # perimeter | infill | raft | support | travel

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


@dataclass
class LayerPath:
    index: int
    z: float
    kind: str = "model"   # "raft" | "model"
    moves: list = field(default_factory=list)
    plane_z: float | None = None


@dataclass
class ToolPath:
    layers: list = field(default_factory=list)
    origin: tuple = (0.0, 0.0)
    warnings: list = field(default_factory=list)

    def moves(self):
        for lp in self.layers:
            yield from lp.moves

    def extrude_length(self) -> float:
        return sum(m.length for m in self.moves() if m.kind == "extrude")

    def travel_length(self) -> float:
        return sum(m.length for m in self.moves() if m.kind == "travel")

    def filament_length(self) -> float:
        return sum(m.extrusion for m in self.moves())

    def check(self):
        """Raise :class:`DiscontinuousPath` unless every move starts where the last ended."""
        cur = tuple(self.origin)
        for lp in self.layers:
            for i, m in enumerate(lp.moves):
                if tuple(m.start) != cur:
                    raise DiscontinuousPath(f"layer {lp.index} move {i} starts at {m.start}, previous ended at {cur}")
                if m.kind == "extrude" and not m.extrusion > 0:
                    raise DiscontinuousPath(f"layer {lp.index} move {i}: extrude move without extrusion")
                if m.kind == "travel" and m.extrusion != 0:
                    raise DiscontinuousPath(f"layer {lp.index} move {i}: travel move extrudes")
                cur = tuple(m.end)


# perimeters and infill

def generate_perimeters(layer: Layer, cfg: PrintConfig, report=None):
    """One loop per contour, inset half a bead so the bead's outer edge traces the model.

    Returns ``[(contour index, loop)]``; loops that vanish are dropped and noted
    in ``report`` (a list) if given, else warned about.
    """
    loops = []
    for i, c in enumerate(layer.contours):
        loop = geometry.offset_polygon(c.vertices, cfg.extrusion_width / 2)
        if loop is None:
            msg = f"z={layer.z:g}: contour {i} is too small for a {cfg.extrusion_width} mm perimeter; dropped"
            if report is None:
                warnings.warn(msg, stacklevel=2)
            else:
                report.append(msg)
            continue
        loops.append((i, geometry.rotate_to_lexmin(loop)))
    return loops


def _infill_region(layer, contour_ids, cfg):
    region = []
    for i in contour_ids:
        inset = geometry.offset_polygon(layer.contours[i].vertices, cfg.extrusion_width)
        if inset is None:
            if layer.contours[i].role == "outer":
                return []
            continue
        region.append(inset)
    return region


def _hatch(region, spacing, vertical):
    """Lines ``spacing`` apart filling ``region``, centred across its extent."""
    if not region:
        return []
    polys = [p[:, ::-1] if vertical else p for p in region]
    _, lo, _, hi = geometry.bounding_box(polys)
    extent = hi - lo
    if extent <= 0:
        return []
    n = max(1, int(math.floor(extent / spacing + 1e-9)))
    first = lo + (extent - (n - 1) * spacing) / 2
    segs = []
    for k in range(n):
        y = first + k * spacing
        for x0, x1 in geometry.scanline_intervals(polys, y):
            segs.append(((y, x0), (y, x1)) if vertical else ((x0, y), (x1, y)))
    return segs


def _island_infill(layer, contour_ids, cfg, layer_index):
    if cfg.fill_fraction <= 0:
        return []
    region = _infill_region(layer, contour_ids, cfg)
    return _hatch(region, cfg.extrusion_width / cfg.fill_fraction, vertical=layer_index % 2 == 1)


def generate_infill(layer: Layer, cfg: PrintConfig, layer_index: int):
    """Rectilinear fill lines clipped to the region inside the perimeter beads.

    Line spacing is ``extrusion_width / fill_fraction``; even layers run along
    x, odd layers along y.  Lines come back grouped by island.
    """
    segs = []
    for outer, holes in layer.islands:
        segs.extend(_island_infill(layer, [outer, *holes], cfg, layer_index))
    return segs


def raft_rectangle(first_layer: Layer, cfg: PrintConfig, extra_points=()):
    """Bounding rectangle of the outer contours' convex hull, grown by the raft margin."""
    pts = [c.vertices for c in first_layer.outers]
    if len(extra_points):
        pts.append(np.asarray(extra_points, dtype=np.float64).reshape(-1, 2))
    bb = geometry.bounding_box(pts)
    if bb is None:
        return None
    m = cfg.raft_margin
    return (bb[0] - m, bb[1] - m, bb[2] + m, bb[3] + m)


def generate_raft(first_layer: Layer, cfg: PrintConfig, extra_points=()):
    """``raft_layers`` solid layers of lines covering the first layer's footprint.

    Returns a list (one entry per raft layer) of line segments; directions
    alternate between layers.
    """
    if cfg.raft_layers == 0:
        return []
    rect = raft_rectangle(first_layer, cfg, extra_points)
    if rect is None:
        return []
    x0, y0, x1, y1 = rect
    poly = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    return [_hatch([poly], cfg.extrusion_width, vertical=r % 2 == 1) for r in range(cfg.raft_layers)]


# supports

@dataclass
class Overhangs:
    facets: np.ndarray
    columns: list  # (x, y, top z)


def _xy_cover(points, tris):
    """For each point and triangle: barycentric inclusion in the xy projection and z there."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    px = points[:, None, 0]
    py = points[:, None, 1]
    det = (b[:, 1] - c[:, 1]) * (a[:, 0] - c[:, 0]) + (c[:, 0] - b[:, 0]) * (a[:, 1] - c[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = ((b[:, 1] - c[:, 1]) * (px - c[:, 0]) + (c[:, 0] - b[:, 0]) * (py - c[:, 1])) / det
        l2 = ((c[:, 1] - a[:, 1]) * (px - c[:, 0]) + (a[:, 0] - c[:, 0]) * (py - c[:, 1])) / det
        l3 = 1 - l1 - l2
        z = l1 * a[:, 2] + l2 * b[:, 2] + l3 * c[:, 2]
    # grid points often sit exactly on shared edges; rounding must not drop them
    eps = -1e-12
    inside = (det != 0) & (l1 >= eps) & (l2 >= eps) & (l3 >= eps)
    return inside, z


def detect_overhangs(m, cfg: PrintConfig, plate_z: float = 0.0, chunk: int = 512) -> Overhangs:
    """Facets facing down more steeply than the overhang angle, and pillars under them.

    A facet overhangs when its normal's z component is below
    ``-sin(support_overhang_deg)``; facets resting on the plate never do.
    Pillars stand on a ``4 * extrusion_width`` grid and stop one layer below
    the lowest overhang above them.  Spots where the model itself is in the
    way are skipped, since pillars only stand on the plate.
    """
    normals = m.normals
    verts = m.vertices
    on_plate = np.all(verts[:, :, 2] <= plate_z + 1e-9, axis=1)
    over = (normals[:, 2] < -math.sin(math.radians(cfg.support_overhang_deg))) & ~on_plate
    idx = np.flatnonzero(over)
    if idx.size == 0:
        return Overhangs(idx, [])
    tris = verts[idx]
    step = 4 * cfg.extrusion_width
    lo = tris[:, :, :2].reshape(-1, 2).min(axis=0)
    hi = tris[:, :, :2].reshape(-1, 2).max(axis=0)
    gx = np.arange(math.ceil(lo[0] / step - 1e-9), math.floor(hi[0] / step + 1e-9) + 1) * step
    gy = np.arange(math.ceil(lo[1] / step - 1e-9), math.floor(hi[1] / step + 1e-9) + 1) * step
    if gx.size == 0 or gy.size == 0:
        return Overhangs(idx, [])
    GX, GY = np.meshgrid(gx, gy)
    pts = np.stack([GX.ravel(), GY.ravel()], axis=1)
    columns = []
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk]
        inside, z = _xy_cover(p, tris)
        ztop = np.where(inside, z, np.inf).min(axis=1)
        hit = np.isfinite(ztop) & (ztop > plate_z + cfg.layer_thickness)
        if not hit.any():
            continue
        p, ztop = p[hit], ztop[hit]
        inside_all, z_all = _xy_cover(p, verts)
        below = inside_all & (z_all < ztop[:, None] - 1e-9) & (z_all > plate_z + 1e-9)
        free = ~below.any(axis=1)
        for (x, y), zt in zip(p[free].tolist(), ztop[free].tolist()):
            columns.append((x, y, zt - cfg.layer_thickness))
    return Overhangs(idx, columns)


# island ordering

def path_length(points, order, start) -> float:
    cur = start
    total = 0.0
    for i in order:
        total += math.dist(cur, points[i])
        cur = points[i]
    return total


def nearest_neighbor(points, start, first=None):
    left = list(range(len(points)))
    cur = start
    order = []
    if first is not None:
        left.remove(first)
        order.append(first)
        cur = points[first]
    while left:
        best = min(left, key=lambda i: (math.dist(cur, points[i]), i))
        order.append(best)
        left.remove(best)
        cur = points[best]
    return order


def two_opt(points, order, start):
    """Reverse sub-runs of the open path while that shortens it.

    Each pass applies the single best reversal; ties go to the lowest
    ``(i, j)``, so the result is deterministic.
    """
    order = list(order)
    n = len(order)
    if n < 2:
        return order
    seq = np.array([start] + [points[i] for i in order], dtype=np.float64)
    i_idx = np.arange(1, n)[:, None]
    j_idx = np.arange(1, n + 1)[None, :]
    upper = j_idx > i_idx
    while True:
        diff = seq[:, None, :] - seq[None, :, :]
        dist = np.zeros((n + 1, n + 2))
        dist[:, :n + 1] = np.hypot(diff[..., 0], diff[..., 1])
        # the extra zero column stands in for the missing edge after the path's end
        before = dist[i_idx - 1, i_idx] + dist[j_idx, j_idx + 1]
        after = dist[i_idx - 1, j_idx] + dist[i_idx, j_idx + 1]
        gain = np.where(upper, before - after, -np.inf)
        k = int(np.argmax(gain))
        if not gain.flat[k] > 1e-12:
            return order
        i, j = divmod(k, n)
        i, j = i + 1, j + 1
        seq[i:j + 1] = seq[i:j + 1][::-1].copy()
        order[i - 1:j] = order[i - 1:j][::-1]


def _distances(points, order, start):
    # index n + 1 is a phantom stop at zero distance from everything: the open end
    n = len(order)
    seq = np.array([start] + [points[i] for i in order], dtype=np.float64)
    diff = seq[:, None, :] - seq[None, :, :]
    dist = np.zeros((n + 2, n + 2))
    dist[:n + 1, :n + 1] = np.hypot(diff[..., 0], diff[..., 1])
    return dist


def or_opt(points, order, start, max_run=3):
    """Best single relocation of a run of up to ``max_run`` stops, or None.

    The run may be reinserted reversed; ties go to the shortest run, then the
    lowest position.
    """
    order = list(order)
    n = len(order)
    if n < 2:
        return None
    dist = _distances(points, order, start)
    k = np.arange(n + 1)
    best_gain, best = 1e-12, None
    for run in range(1, min(max_run, n - 1) + 1):
        i = np.arange(1, n - run + 2)[:, None]
        e = i + run - 1
        q = np.minimum(e + 1, n + 1)
        removed = dist[i - 1, i] + dist[e, q] - dist[i - 1, q]
        fwd = dist[k, i] + dist[e, k + 1] - dist[k, k + 1]
        rev = dist[k, e] + dist[i, k + 1] - dist[k, k + 1]
        gain = np.where((k < i - 1) | (k > e), removed - np.minimum(fwd, rev), -np.inf)
        a = int(np.argmax(gain))
        if gain.flat[a] > best_gain:
            r, at = divmod(a, n + 1)
            best_gain, best = gain.flat[a], (run, r + 1, at, bool(rev[r, at] < fwd[r, at]))
    if best is None:
        return None
    run, i, at, flip = best
    moved = order[i - 1:i - 1 + run]
    if flip:
        moved.reverse()
    rest = order[:i - 1] + order[i - 1 + run:]
    pos = at if at < i else at - run
    return rest[:pos] + moved + rest[pos:]


def local_search(points, order, start):
    """2-opt to convergence, then one Or-opt move, until neither helps."""
    while True:
        order = two_opt(points, order, start)
        moved = or_opt(points, order, start)
        if moved is None:
            return order
        order = moved


ORDER_STARTS = 8


def order_islands(points, start=(0.0, 0.0)):
    """Visit order for island entry points.

    Nearest-neighbour tours seeded with each of the ``ORDER_STARTS`` stops
    closest to ``start`` are improved by :func:`local_search`; the shortest
    wins, ties to the earlier seed.  The first seed is the plain
    nearest-neighbour tour, so the result is never longer than it.

    Returns ``(order, travel length)`` for the open path from ``start``.
    """
    pts = [tuple(map(float, p)) for p in points]
    start = tuple(map(float, start))
    if not pts:
        return [], 0.0
    seeds = sorted(range(len(pts)), key=lambda i: (math.dist(start, pts[i]), i))[:ORDER_STARTS]
    best, best_len = None, math.inf
    for first in seeds:
        order = local_search(pts, nearest_neighbor(pts, start, first), start)
        length = path_length(pts, order, start)
        if length < best_len - 1e-12:
            best, best_len = order, length
    return best, best_len


def brute_force_order(points, start=(0.0, 0.0)):
    """Exhaustive shortest open path; only for small instances."""
    pts = [tuple(map(float, p)) for p in points]
    best = min(itertools.permutations(range(len(pts))), key=lambda o: path_length(pts, o, start))
    return list(best), path_length(pts, best, start)


# assembling a plan

class _Writer:
    def __init__(self, cfg, origin):
        self.cfg = cfg
        self.cur = tuple(origin)
        self.moves = None
        self.z = 0.0

    def start_layer(self, z, moves):
        self.z = z
        self.moves = moves

    def travel(self, to):
        to = (float(to[0]), float(to[1]))
        if to != self.cur:
            self.moves.append(Move("travel", self.cur, to, self.z, self.cfg.travel_speed))
            self.cur = to

    def extrude(self, to, role):
        to = (float(to[0]), float(to[1]))
        if to == self.cur:
            return
        length = math.dist(self.cur, to)
        self.moves.append(Move("extrude", self.cur, to, self.z, self.cfg.extrude_speed,
                               self.cfg.filament_for(length), role))
        self.cur = to

    def loop(self, poly, role):
        pts = [tuple(p) for p in np.asarray(poly).tolist()]
        self.travel(pts[0])
        for p in pts[1:] + pts[:1]:
            self.extrude(p, role)

    def lines(self, segs, role):
        """Boustrophedon over already-sorted lines."""
        for k, (a, b) in enumerate(segs):
            if k % 2:
                a, b = b, a
            self.travel(a)
            self.extrude(b, role)


def _pillar(x, y, w):
    h = w / 2
    return [(x - h, y - h), (x + h, y - h), (x + h, y + h), (x - h, y + h)]


def _serpentine(points):
    """Row by row, alternating direction; pillars sit on a grid so this is near optimal."""
    rows = {}
    for x, y in points:
        rows.setdefault(y, []).append(x)
    out = []
    for k, y in enumerate(sorted(rows)):
        xs = sorted(rows[y], reverse=bool(k % 2))
        out.extend((x, y) for x in xs)
    return out


def plan_toolpath(layers, cfg: PrintConfig, overhangs: Overhangs | None = None,
                  z_offset: float | None = None, origin=(0.0, 0.0)) -> ToolPath:
    """Turn sliced layers into an ordered list of moves, raft first."""
    t = cfg.layer_thickness
    if z_offset is None:
        z_offset = t / 2
    tp = ToolPath(origin=tuple(origin))
    w = _Writer(cfg, origin)

    columns = overhangs.columns if overhangs is not None else []
    by_plane = {round((lay.z - z_offset) / t): lay for lay in layers}
    if columns:
        top = max(c[2] for c in columns)
        k = 0
        while z_offset + k * t < top:
            by_plane.setdefault(k, Layer(z_offset + k * t))
            k += 1
    plane_ids = sorted(by_plane)

    raft_lift = cfg.raft_layers * t
    if cfg.raft_layers and plane_ids:
        first = next((by_plane[k] for k in plane_ids if by_plane[k].contours), by_plane[plane_ids[0]])
        extra = [(x, y) for x, y, zt in columns if zt > first.z]
        for r, segs in enumerate(generate_raft(first, cfg, extra)):
            lp = LayerPath(len(tp.layers), (r + 1) * t, "raft")
            w.start_layer(lp.z, lp.moves)
            w.lines(segs, "raft")
            tp.layers.append(lp)

    for model_index, k in enumerate(plane_ids):
        layer = by_plane[k]
        lp = LayerPath(len(tp.layers), layer.z + t / 2 + raft_lift, "model", plane_z=layer.z)
        w.start_layer(lp.z, lp.moves)

        loops = dict(generate_perimeters(layer, cfg, tp.warnings))
        islands = [(o, hs) for o, hs in layer.islands]
        entries = [tuple(layer.contours[o].vertices[0]) for o, _ in islands]
        order, _ = order_islands(entries, w.cur)
        for idx in order:
            outer, holes = islands[idx]
            for ci in [outer, *holes]:
                if ci in loops:
                    w.loop(loops[ci], "perimeter")
            w.lines(_island_infill(layer, [outer, *holes], cfg, model_index), "infill")

        pillars = [(x, y) for x, y, zt in columns if layer.z < zt]
        for x, y in _serpentine(pillars):
            w.loop(_pillar(x, y, cfg.extrusion_width), "support")
        tp.layers.append(lp)
    return tp


# G-code

def _num(v, places):
    s = f"{v:.{places}f}"
    # "-0.000" would read as a distinct coordinate in a diff
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def emit_gcode(tp: ToolPath, cfg: PrintConfig, timestamp: str | None = None) -> bytes:
    """RepRap-style G-code: preamble, one motion line per move, postamble.

    ``E`` is absolute and cumulative.  Each layer opens with ``; layer k z=..``.
    """
    tp.check()
    temp = _num(cfg.extruder_temp, 0)
    out = ["; meshprint"]
    if timestamp:
        out.append(f"; generated {timestamp}")
    out += [f"M104 S{temp}", f"M109 S{temp}", "G28", "G90", "G92 E0"]
    e = 0.0
    for lp in tp.layers:
        out.append(f"; layer {lp.index} z={_num(lp.z, 3)}")
        z = _num(lp.z, 3)
        for m in lp.moves:
            x, y = _num(m.end[0], 3), _num(m.end[1], 3)
            f = _num(m.feed, 0)
            if m.kind == "travel":
                out.append(f"G0 X{x} Y{y} Z{z} F{f}")
            else:
                e += m.extrusion
                out.append(f"G1 X{x} Y{y} Z{z} E{_num(e, 5)} F{f}")
    out += ["M104 S0", "M84"]
    return ("\n".join(out) + "\n").encode("ascii")
