"""Cut a mesh into horizontal layers of closed, simple contours.

A vertex lying exactly on a cutting plane is treated as lying just above it.
That choice is applied consistently to every facet, so the segments of a
watertight mesh always chain into closed loops, and the crossing points are
still computed from the true coordinates (a vertex on the plane yields itself).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import geometry, kernels
from .errors import DegenerateThickness, EmptyPrint, NotWatertight, OpenContour
from .mesh import TriangleMesh, validate_watertight

DEFAULT_TOL = 1e-7
MIN_AREA = 1e-6


@dataclass(frozen=True, eq=False)
class Contour:
    vertices: np.ndarray
    role: str  # "outer" | "hole"

    @property
    def signed_area(self) -> float:
        return geometry.signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        return geometry.perimeter(self.vertices)

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class Layer:
    z: float
    contours: list = field(default_factory=list)
    islands: list = field(default_factory=list)  # (outer index, [hole indices])
    open_ends: list = field(default_factory=list)  # dangling endpoints kept when forced
    pinches: list = field(default_factory=list)    # points where contours touch

    @property
    def outers(self):
        return [c for c in self.contours if c.role == "outer"]

    @property
    def holes(self):
        return [c for c in self.contours if c.role == "hole"]

    def area(self) -> float:
        return sum(c.signed_area for c in self.contours)


def intersect_facet_plane(tri, z: float):
    """Segment ((x1, y1), (x2, y2)) where the triangle crosses plane ``z``, or None."""
    seg = kernels.slice_facets(np.ascontiguousarray(np.asarray(tri, dtype=np.float64).reshape(1, 3, 3)), z)
    if len(seg) == 0:
        return None
    (x1, y1), (x2, y2) = seg[0].tolist()
    return (x1, y1), (x2, y2)


def _chain(segments, tol):
    """Link segments into loops by endpoint matching on a hash grid of cell size ``tol``.

    Returns (closed loops as vertex lists, dangling endpoints, pinch points
    where more than two segments meet).
    """
    q = tol if tol > 0 else 0.0
    nodes = []        # representative coordinates
    grid = {}
    node_of = np.empty(2 * len(segments), dtype=np.int64)

    def key(x, y):
        return (math.floor(x / q), math.floor(y / q)) if q else (x, y)

    pts = segments.reshape(-1, 2).tolist()
    for i, (x, y) in enumerate(pts):
        found = -1
        if q:
            kx, ky = key(x, y)
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for n in grid.get((kx + dx, ky + dy), ()):
                        nx, ny = nodes[n]
                        if abs(nx - x) <= q and abs(ny - y) <= q:
                            found = n
                            break
                    if found >= 0:
                        break
                if found >= 0:
                    break
            if found < 0:
                found = len(nodes)
                nodes.append((x, y))
                grid.setdefault((kx, ky), []).append(found)
        else:
            k = (x, y)
            found = grid.get(k, -1)
            if found < 0:
                found = len(nodes)
                nodes.append(k)
                grid[k] = found
        node_of[i] = found

    ends = node_of.reshape(-1, 2)
    adj = [[] for _ in nodes]
    for s, (a, b) in enumerate(ends.tolist()):
        if a == b:
            continue
        adj[a].append(s)
        adj[b].append(s)
    dangling = [nodes[n] for n in range(len(nodes)) if len(adj[n]) % 2]
    pinches = [nodes[n] for n in range(len(nodes)) if len(adj[n]) > 2]

    used = np.zeros(len(ends), dtype=bool)
    used[ends[:, 0] == ends[:, 1]] = True
    loops = []
    for s0 in range(len(ends)):
        if used[s0]:
            continue
        used[s0] = True
        start, cur = int(ends[s0, 0]), int(ends[s0, 1])
        loop = [start]
        closed = True
        while cur != start:
            loop.append(cur)
            nxt = next((s for s in adj[cur] if not used[s]), None)
            if nxt is None:
                closed = False
                break
            used[nxt] = True
            a, b = ends[nxt]
            cur = int(b) if a == cur else int(a)
        if closed:
            loops.append([nodes[n] for n in loop])
    return loops, dangling, pinches


def _assign_roles(loops):
    """Orient and classify cleaned loops by even-odd nesting depth."""
    polys = [geometry.drop_collinear(p) for p in loops]
    polys = [p for p in polys if len(p) >= 3 and geometry.signed_area(p) != 0.0]
    depth = []
    for i, p in enumerate(polys):
        probe = p[0]
        d = sum(1 for j, other in enumerate(polys) if j != i and geometry.point_in_polygon(probe, other))
        depth.append(d)
    contours = []
    for p, d in zip(polys, depth):
        role = "outer" if d % 2 == 0 else "hole"
        a = geometry.signed_area(p)
        if (role == "outer") != (a > 0):
            p = p[::-1]
        contours.append((Contour(geometry.rotate_to_lexmin(p), role), d))
    contours.sort(key=lambda cd: (cd[0].vertices[0, 0], cd[0].vertices[0, 1]))
    return contours


def _islands(contours_with_depth):
    contours = [c for c, _ in contours_with_depth]
    depths = [d for _, d in contours_with_depth]
    islands = {i: [] for i, c in enumerate(contours) if c.role == "outer"}
    for i, c in enumerate(contours):
        if c.role != "hole":
            continue
        probe = c.vertices[0]
        owners = [j for j in islands if depths[j] == depths[i] - 1
                  and geometry.point_in_polygon(probe, contours[j].vertices)]
        if owners:
            islands[owners[0]].append(i)
    return contours, [(o, hs) for o, hs in islands.items()]


def stitch_segments(segments, tol: float = DEFAULT_TOL, z=None):
    """Chain unordered segments into oriented contours (outers CCW, holes CW).

    Raises :class:`OpenContour` with the dangling endpoints if any chain fails
    to close.
    """
    contours, _, dangling, _ = _stitch(segments, tol)
    if dangling:
        raise OpenContour(dangling, z)
    return contours


def _stitch(segments, tol):
    seg = np.asarray(segments, dtype=np.float64).reshape(-1, 2, 2)
    if len(seg) == 0:
        return [], [], [], []
    loops, dangling, pinches = _chain(seg, tol)
    contours, islands = _islands(_assign_roles(loops))
    return contours, islands, dangling, pinches


def build_layer(z, segments, tol=DEFAULT_TOL, force=False) -> Layer:
    contours, islands, dangling, pinches = _stitch(segments, tol)
    if dangling and not force:
        raise OpenContour(dangling, z)
    return Layer(z, contours, islands, dangling, pinches)


def slice_at(m: TriangleMesh, z: float, tol=DEFAULT_TOL, force=False) -> Layer:
    tris = np.ascontiguousarray(m.vertices)
    return build_layer(z, kernels.slice_facets(tris, z), tol, force)


def plane_heights(m: TriangleMesh, layer_thickness: float, z_offset: float | None = None):
    if not (layer_thickness > 0 and math.isfinite(layer_thickness)):
        raise DegenerateThickness(f"layer thickness must be positive, got {layer_thickness}")
    if z_offset is None:
        z_offset = layer_thickness / 2
    (_, _, zmin), (_, _, zmax) = m.bounds()
    zs = []
    k = 0
    while True:
        z = z_offset + k * layer_thickness
        if z >= zmax:
            break
        if z > zmin:
            zs.append(z)
        k += 1
    return zs


def slice_mesh(m: TriangleMesh, layer_thickness: float, z_offset: float | None = None,
               tol=DEFAULT_TOL, force=False, check=True, workers=1) -> list[Layer]:
    """Slice at ``z_offset + k*layer_thickness`` for every plane strictly inside the mesh.

    The default offset is half a layer so planes miss flat tops and bottoms.
    Non-watertight meshes are refused unless ``check`` is off.
    """
    if check:
        report = validate_watertight(m)
        if not report.watertight:
            raise NotWatertight(report)
    zs = plane_heights(m, layer_thickness, z_offset)
    if not zs:
        warnings.warn("no slicing plane falls inside the mesh", EmptyPrint, stacklevel=2)
        return []
    tris = np.ascontiguousarray(m.vertices)
    (lo, hi) = tris[:, :, 2].min(axis=1), tris[:, :, 2].max(axis=1)

    def one(z):
        # only facets whose z-range touches the plane can contribute
        sub = np.ascontiguousarray(tris[(lo <= z) & (hi >= z)])
        return build_layer(z, kernels.slice_facets(sub, z), tol, force)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, zs))
    return [one(z) for z in zs]


@dataclass
class Finding:
    kind: str          # simplicity | closure | area | nesting | vertices
    layer: int
    contour: int
    detail: str
    data: tuple = ()

    def __str__(self):
        return f"layer {self.layer} contour {self.contour}: {self.kind} violation: {self.detail}"


@dataclass
class ContourReport:
    findings: list = field(default_factory=list)
    layers: int = 0

    @property
    def clean(self) -> bool:
        return not self.findings

    def of_kind(self, kind):
        return [f for f in self.findings if f.kind == kind]


def validate_contours(layers) -> ContourReport:
    """Check every contour is a closed, simple polygon of real area, and that
    holes sit inside their outers."""
    report = ContourReport(layers=len(layers))
    add = report.findings.append
    for li, layer in enumerate(layers):
        if layer.open_ends:
            add(Finding("closure", li, -1, f"{len(layer.open_ends)} dangling endpoints",
                        tuple(layer.open_ends)))
        for p in layer.pinches:
            add(Finding("simplicity", li, -1, f"contours touch at ({p[0]:.6g}, {p[1]:.6g})", tuple(p)))
        for ci, c in enumerate(layer.contours):
            v = geometry.as_polygon(c.vertices)
            if len(v) < 3:
                add(Finding("vertices", li, ci, f"only {len(v)} vertices"))
                continue
            if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
                add(Finding("vertices", li, ci, "repeated consecutive vertex"))
            i, j = geometry.first_crossing(v)
            if i >= 0:
                add(Finding("simplicity", li, ci, f"edges {i} and {j} cross", (i, j)))
            a = geometry.signed_area(v)
            if abs(a) <= MIN_AREA:
                add(Finding("area", li, ci, f"area {a:.3g} mm^2 below {MIN_AREA}"))
            elif (c.role == "outer") != (a > 0):
                add(Finding("nesting", li, ci, f"{c.role} has the wrong orientation (area {a:.3g})"))
        owner = {}
        for oi, holes in layer.islands:
            for h in holes:
                owner[h] = oi
        for ci, c in enumerate(layer.contours):
            if c.role != "hole":
                continue
            if ci not in owner:
                add(Finding("nesting", li, ci, "hole is not inside any outer contour"))
                continue
            outer = layer.contours[owner[ci]].vertices
            if not np.all(geometry.points_in_polygon(c.vertices, outer)):
                add(Finding("nesting", li, ci, f"hole leaves its outer contour {owner[ci]}"))
    return report
