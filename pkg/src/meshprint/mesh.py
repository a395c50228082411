"""Triangle meshes: heightfield tessellation, validation and rigid transforms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DegenerateFacet
from .heightfield import HeightField

NORMAL_TOL = 1e-6


class Facet(NamedTuple):
    normal: tuple
    v1: tuple
    v2: tuple
    v3: tuple


def facet_normal(v1, v2, v3) -> tuple[float, float, float]:
    """Unit normal of the triangle by the right-hand rule, (v2-v1) x (v3-v1)."""
    n = _normals(np.array([[v1, v2, v3]], dtype=np.float64))
    if not np.isfinite(n).all():
        raise DegenerateFacet(f"collinear vertices {tuple(v1)}, {tuple(v2)}, {tuple(v3)}")
    return tuple(float(c) for c in n[0])


def _cross_products(tris: np.ndarray) -> np.ndarray:
    a = tris[:, 1] - tris[:, 0]
    b = tris[:, 2] - tris[:, 0]
    return np.cross(a, b)


def _normals(tris: np.ndarray) -> np.ndarray:
    """Unit normals; NaN rows for degenerate triangles.  -0.0 is folded to 0.0."""
    c = _cross_products(tris)
    norm = np.sqrt((c * c).sum(axis=1))
    with np.errstate(invalid="ignore", divide="ignore"):
        n = c / norm[:, None]
    n[norm == 0] = np.nan
    return n + 0.0


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """An ordered list of facets held as arrays.

    ``vertices`` has shape (n, 3, 3) and ``normals`` shape (n, 3).  Normals are
    stored as given (files in the wild carry all sorts); pass ``normals=None``
    to compute them from the winding.
    """

    vertices: np.ndarray
    normals: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3, 3)
        if self.normals is None:
            n = _normals(v) if len(v) else np.empty((0, 3))
            bad = np.flatnonzero(~np.isfinite(n).all(axis=1))
            if bad.size:
                raise DegenerateFacet(f"facet {int(bad[0])} is degenerate")
        else:
            n = np.array(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(n) != len(v):
                raise ValueError(f"{len(n)} normals for {len(v)} facets")
        v.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "normals", n)

    @classmethod
    def from_facets(cls, facets, name=""):
        facets = list(facets)
        if not facets:
            return cls(np.empty((0, 3, 3)), np.empty((0, 3)), name)
        verts = [[f[1], f[2], f[3]] for f in facets]
        norms = [f[0] for f in facets]
        return cls(np.array(verts, dtype=np.float64), np.array(norms, dtype=np.float64), name)

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        for n, (a, b, c) in zip(self.normals.tolist(), self.vertices.tolist()):
            yield Facet(tuple(n), tuple(a), tuple(b), tuple(c))

    @property
    def facets(self) -> list[Facet]:
        return list(self)

    def __eq__(self, other):
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return (self.name == other.name
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.normals, other.normals))

    __hash__ = None

    def bounds(self):
        """((xmin, ymin, zmin), (xmax, ymax, zmax))."""
        pts = self.vertices.reshape(-1, 3)
        return tuple(pts.min(axis=0).tolist()), tuple(pts.max(axis=0).tolist())

    def with_name(self, name):
        return TriangleMesh(self.vertices, self.normals, name)

    def recompute_normals(self):
        return TriangleMesh(self.vertices, None, self.name)


def signed_volume(m: TriangleMesh) -> float:
    """Sum of signed tetrahedra against the origin; positive for outward winding."""
    v = m.vertices
    return float(np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum() / 6.0)


def tessellate_heightfield(h: HeightField, closed: bool = True, plinth: float = 0.0,
                           name: str = "") -> TriangleMesh:
    """Triangulate ``h`` two triangles per cell and close it into a solid.

    Cell (c, r) gives the lower-left triangle ``(c,r) (c+1,r) (c,r+1)`` and the
    upper-right triangle ``(c+1,r+1) (c,r+1) (c+1,r)``; all lower-left triangles
    come first, then all upper-right ones, each block looping x-major.  With
    ``closed`` the surface gets vertical walls to z = 0 and a base at z = 0
    triangulated on the same lattice, so the result is watertight with
    outward normals.

    ``plinth`` lifts the top surface by that many mm.  Without a plinth,
    triangles lying entirely at z = 0 are dropped together with the base
    triangle under them; a zero-height line between two raised regions still
    pinches the solid and will show up in :func:`validate_watertight`.
    """
    if plinth < 0:
        raise ValueError("plinth must be >= 0")
    xs = h.xs
    ys = h.ys
    rows, cols = h.rows, h.cols
    top = h.heights + plinth
    X, Y = np.meshgrid(xs, ys)  # (rows, cols)
    P = np.stack([X, Y, top], axis=-1)
    B = np.stack([X, Y, np.zeros_like(top)], axis=-1)

    def cells(grid, dc, dr):
        # (cols-1)*(rows-1) lattice points offset by (dc, dr), x-major order
        return grid[dr:rows - 1 + dr, dc:cols - 1 + dc].transpose(1, 0, 2).reshape(-1, 3)

    f1 = np.stack([cells(P, 0, 0), cells(P, 1, 0), cells(P, 0, 1)], axis=1)
    f2 = np.stack([cells(P, 1, 1), cells(P, 0, 1), cells(P, 1, 0)], axis=1)
    top_tris = np.concatenate([f1, f2])
    if not closed:
        return TriangleMesh(top_tris, None, name)

    b1 = np.stack([cells(B, 0, 0), cells(B, 0, 1), cells(B, 1, 0)], axis=1)
    b2 = np.stack([cells(B, 1, 1), cells(B, 1, 0), cells(B, 0, 1)], axis=1)
    base_tris = np.concatenate([b1, b2])
    flat = np.all(top_tris[:, :, 2] == 0.0, axis=1)
    if flat.any():
        top_tris = top_tris[~flat]
        base_tris = base_tris[~flat]

    # boundary walked counter-clockwise seen from above
    ring = np.concatenate([
        P[0, :],                 # front, +x
        P[1:, -1],               # right, +y
        P[-1, -2::-1],           # back, -x
        P[-2:0:-1, 0],           # left, -y
    ])
    ring_next = np.roll(ring, -1, axis=0)
    p1t, p2t = ring, ring_next
    p1b = p1t.copy()
    p1b[:, 2] = 0.0
    p2b = p2t.copy()
    p2b[:, 2] = 0.0
    walls = []
    for k in range(len(ring)):
        if p2t[k, 2] > 0.0:
            walls.append((p1b[k], p2b[k], p2t[k]))
        if p1t[k, 2] > 0.0:
            walls.append((p1b[k], p2t[k], p1t[k]))
    wall_tris = np.array(walls, dtype=np.float64).reshape(-1, 3, 3)
    return TriangleMesh(np.concatenate([top_tris, wall_tris, base_tris]), None, name)


@dataclass
class WatertightReport:
    edges: list = field(default_factory=list)          # (vertex a, vertex b, facet count)
    degenerate: list = field(default_factory=list)     # facet indices
    normal_mismatch: list = field(default_factory=list)  # (facet index, max component deviation)
    facet_count: int = 0

    @property
    def watertight(self) -> bool:
        return not self.edges and self.facet_count > 0

    @property
    def ok(self) -> bool:
        """Watertight with no degenerate facets.  Normal mismatches are advisory."""
        return self.watertight and not self.degenerate

    @property
    def clean(self) -> bool:
        return self.ok and not self.normal_mismatch

    def summary(self) -> str:
        return (f"{self.facet_count} facets, {len(self.edges)} bad edges, "
                f"{len(self.degenerate)} degenerate, {len(self.normal_mismatch)} normal mismatches")

    def lines(self, limit=20):
        out = [self.summary()]
        for a, b, n in self.edges[:limit]:
            out.append(f"  edge {a} - {b} shared by {n} facet(s)")
        if len(self.edges) > limit:
            out.append(f"  ... {len(self.edges) - limit} more edges")
        for i in self.degenerate[:limit]:
            out.append(f"  facet {i} is degenerate")
        for i, dev in self.normal_mismatch[:limit]:
            out.append(f"  facet {i} stored normal deviates by {dev:.3g}")
        if len(self.normal_mismatch) > limit:
            out.append(f"  ... {len(self.normal_mismatch) - limit} more normal mismatches")
        return out


def _vertex_ids(points: np.ndarray) -> np.ndarray:
    # bit-exact identity, with -0.0 folded into 0.0
    keys = np.ascontiguousarray(points + 0.0).view(np.int64).reshape(-1, 3)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    return inverse.ravel()


def edge_counts(m: TriangleMesh):
    """Unique undirected edges as vertex-id pairs, with how many facets use each."""
    ids = _vertex_ids(m.vertices.reshape(-1, 3)).reshape(-1, 3)
    e = np.concatenate([ids[:, [0, 1]], ids[:, [1, 2]], ids[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return ids, uniq, counts


def validate_watertight(m: TriangleMesh) -> WatertightReport:
    """Report edges not shared by exactly two facets, degenerate facets, and
    stored normals that disagree with the winding by more than 1e-6."""
    report = WatertightReport(facet_count=len(m))
    if len(m) == 0:
        return report
    pts = m.vertices.reshape(-1, 3)
    ids, uniq, counts = edge_counts(m)
    bad = counts != 2
    if bad.any():
        first = {}
        for vid, p in zip(ids.ravel().tolist(), pts.tolist()):
            first.setdefault(vid, tuple(p))
        report.edges = [(first[a], first[b], int(c)) for (a, b), c in zip(uniq[bad].tolist(), counts[bad].tolist())]
    geo = _normals(m.vertices)
    degenerate = ~np.isfinite(geo).all(axis=1)
    report.degenerate = np.flatnonzero(degenerate).tolist()
    dev = np.abs(geo - m.normals).max(axis=1)
    mismatch = (~degenerate) & ~(dev <= NORMAL_TOL)
    report.normal_mismatch = [(int(i), float(dev[i])) for i in np.flatnonzero(mismatch)]
    return report


def transform(m: TriangleMesh, scale: float | None = None, mirror_x: bool = False,
              translate=None) -> TriangleMesh:
    """Apply (in this order) uniform scale, mirror across x = 0, translation.

    Normals are recomputed; mirroring also swaps two vertices of every facet so
    the winding, and therefore outward orientation, survives.
    """
    v = m.vertices.copy()
    if scale is not None:
        if not scale > 0:
            raise ValueError(f"scale must be positive, got {scale}")
        v = v * scale
    if mirror_x:
        v[:, :, 0] = -v[:, :, 0]
        v = v[:, [0, 2, 1]]
    if translate is not None:
        v = v + np.asarray(translate, dtype=np.float64)
    return TriangleMesh(v, None, m.name)


# the classic hand-written 40 mm cube, facet for facet
_CUBE = [
    ((0, -1, 0), (0, 0, 0), (1, 0, 0), (0, 0, 1)),
    ((0, -1, 0), (1, 0, 1), (1, 0, 0), (0, 0, 1)),
    ((0, 1, 0), (0, 1, 0), (1, 1, 0), (0, 1, 1)),
    ((0, 1, 0), (1, 1, 1), (1, 1, 0), (0, 1, 1)),
    ((-1, 0, 0), (0, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((-1, 0, 0), (0, 1, 1), (0, 1, 0), (0, 0, 1)),
    ((1, 0, 0), (1, 0, 0), (1, 1, 0), (1, 0, 1)),
    ((1, 0, 0), (1, 1, 1), (1, 1, 0), (1, 0, 1)),
    ((0, 0, -1), (0, 0, 0), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (1, 1, 0), (1, 0, 0), (0, 1, 0)),
    ((0, 0, 1), (0, 0, 1), (1, 0, 1), (0, 1, 1)),
    ((0, 0, 1), (1, 1, 1), (1, 0, 1), (0, 1, 1)),
]


def listing_cube(side: float = 40.0, name: str = "mycube") -> TriangleMesh:
    """The hand-written 12-facet cube, vertex order and stored normals as listed.

    The listed windings are not consistent (half the facets wind against their
    stored normal); readers and this package's slicer do not care, and
    :func:`validate_watertight` reports them as normal mismatches.
    """
    s = float(side)
    verts = [[[c * s for c in v] for v in f[1:]] for f in _CUBE]
    norms = [[float(c) for c in f[0]] for f in _CUBE]
    return TriangleMesh(np.array(verts) + 0.0, np.array(norms) + 0.0, name)


def box(sx: float, sy: float, sz: float, name: str = "") -> TriangleMesh:
    """Axis-aligned solid box with a corner at the origin, 12 facets, outward windings."""
    m = tessellate_heightfield(HeightField([[1.0, 1.0], [1.0, 1.0]]), name=name)
    return TriangleMesh(m.vertices * np.array([sx, sy, sz], dtype=np.float64), None, name)
