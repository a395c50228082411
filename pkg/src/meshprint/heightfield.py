"""Rectangular height grids built from functions, images, elevation and depth data.

Grid row ``r`` and column ``c`` sit at ``(x0 + c*spacing, y0 + r*spacing)``.
Heights are millimetres above the build plate.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AllBelowFloor, EmptyDomain, GridFormatError, HeightFieldError, NonFiniteValue,
    ShapeMismatch, UnsupportedRaster,
)
from .expr import Expression, evaluate

DEFAULT_PAD = 2
IMAGE_HEIGHT = 10.0
ELEVATION_SCALE = 1 / 50
DEPTH_SCALE = 1 / 10
DEPTH_LO = 20.0
DEPTH_HI = 1500.0


@dataclass(frozen=True)
class HeightField:
    heights: np.ndarray
    spacing: float = 1.0
    base_height: float | None = None
    origin: tuple[float, float] = (0.0, 0.0)
    rows: int = field(init=False)
    cols: int = field(init=False)

    def __post_init__(self):
        h = np.array(self.heights, dtype=np.float64)
        if h.ndim != 2:
            raise ShapeMismatch(f"heights must be 2-D, got shape {h.shape}")
        rows, cols = h.shape
        if rows < 2 or cols < 2:
            raise ShapeMismatch(f"need at least 2x2 samples, got {rows}x{cols}")
        bad = np.flatnonzero(~np.isfinite(h))
        if bad.size:
            raise NonFiniteValue(int(bad[0]), float(h.flat[bad[0]]))
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise HeightFieldError(f"spacing must be positive, got {self.spacing}")
        base = float(h.min()) if self.base_height is None else float(self.base_height)
        if base < 0:
            raise HeightFieldError(f"heights must be >= 0 (lowest is {base}); shift or rescale the data")
        if h.min() < base:
            raise HeightFieldError(f"height {h.min()} below base_height {base}")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)
        object.__setattr__(self, "base_height", base)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def xs(self) -> np.ndarray:
        return self.origin[0] + np.arange(self.cols) * self.spacing

    @property
    def ys(self) -> np.ndarray:
        return self.origin[1] + np.arange(self.rows) * self.spacing

    def flat(self) -> np.ndarray:
        """Row-major height list, length rows*cols."""
        return self.heights.ravel().copy()

    def boundary(self) -> np.ndarray:
        h = self.heights
        return np.concatenate([h[0, :], h[-1, :], h[1:-1, 0], h[1:-1, -1]])


@dataclass(frozen=True)
class GridSourceSpec:
    """How a flat value stream maps onto a padded grid."""

    length_x: int
    total: int
    scale: float = 1.0
    pad_width: int = DEFAULT_PAD
    pad_value: float | None = None  # None: the lowest scaled value

    def __post_init__(self):
        if self.length_x <= 0 or self.total <= 0:
            raise ShapeMismatch("length_x and total must be positive")
        if self.total % self.length_x:
            raise ShapeMismatch(f"total {self.total} is not a multiple of length_x {self.length_x}")
        if self.pad_width < 0:
            raise ShapeMismatch("pad_width must be >= 0")


def from_function(e: Expression, xmin, xmax, ymin, ymax, res, region: Expression | None = None,
                  floor=0.0) -> HeightField:
    """Sample ``e`` on a lattice with spacing ``1/res`` mm.

    Samples outside ``region`` (where it evaluates <= 0), non-finite samples
    and samples below ``floor`` are replaced by ``floor``, which truncates the
    surface on a flat base.
    """
    if not (xmax > xmin and ymax > ymin):
        raise EmptyDomain(f"empty domain x[{xmin}, {xmax}] y[{ymin}, {ymax}]")
    if not res > 0:
        raise EmptyDomain(f"res must be positive, got {res}")
    if floor < 0:
        raise HeightFieldError(f"floor must be >= 0, got {floor}")
    spacing = 1.0 / res
    cols = int(math.floor((xmax - xmin) * res + 1e-9)) + 1
    rows = int(math.floor((ymax - ymin) * res + 1e-9)) + 1
    if cols < 2 or rows < 2:
        raise EmptyDomain(f"domain yields {cols}x{rows} samples; need at least 2 per axis")
    xs = xmin + np.arange(cols) * spacing
    ys = ymin + np.arange(rows) * spacing
    h = np.empty((rows, cols))
    for r, y in enumerate(ys.tolist()):
        for c, x in enumerate(xs.tolist()):
            v = evaluate(e, x, y)
            if region is not None and not evaluate(region, x, y) > 0:
                v = floor
            elif not math.isfinite(v) or v < floor:
                v = floor
            h[r, c] = v
    if np.all(h == floor):
        raise AllBelowFloor("every sample is at or below the floor; nothing to print")
    return HeightField(h, spacing=spacing, base_height=floor, origin=(xmin, ymin))


def pad_grid(grid, width: int, value: float) -> np.ndarray:
    if width == 0:
        return np.asarray(grid, dtype=np.float64)
    return np.pad(np.asarray(grid, dtype=np.float64), width, mode="constant", constant_values=value)


def from_image(pixels, threshold=0.5, height_scale=IMAGE_HEIGHT, pad_width=DEFAULT_PAD,
               spacing=1.0) -> HeightField:
    """Binarize a grayscale raster (values in [0, 1]) into a two-level relief.

    Pixels at or above ``threshold`` become ``height_scale`` mm, the rest 0.
    Grid row i is image row i.  A zero border closes every level curve.
    """
    px = np.asarray(pixels, dtype=np.float64)
    if px.ndim != 2:
        raise UnsupportedRaster(f"expected a 2-D grayscale raster, got shape {px.shape}; convert to grayscale first")
    if px.size == 0:
        raise UnsupportedRaster("empty raster")
    if not 0 < threshold < 1:
        raise HeightFieldError(f"threshold must be in (0, 1), got {threshold}")
    if not height_scale > 0:
        raise HeightFieldError(f"height_scale must be positive, got {height_scale}")
    if np.any(~np.isfinite(px)) or px.min() < 0 or px.max() > 1:
        raise UnsupportedRaster("pixel values must lie in [0, 1]")
    binary = np.where(px >= threshold, float(height_scale), 0.0)
    return HeightField(pad_grid(binary, pad_width, 0.0), spacing=spacing, base_height=0.0)


def apply_scale(values, scale):
    """Multiply by ``scale``; a scale equal to the float nearest ``1/k`` divides by ``k``.

    Dividing keeps integer data bit-identical to ``data / k``.
    """
    v = np.asarray(values, dtype=np.float64)
    k = round(1.0 / scale) if scale > 0 else 0
    if k >= 1 and 1.0 / k == scale:
        return v / k
    return v * scale


def _reshape_stream(values, spec: GridSourceSpec) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size != spec.total:
        raise ShapeMismatch(f"stream has {v.size} values, expected {spec.total}")
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise NonFiniteValue(int(bad[0]), float(v[bad[0]]))
    return v.reshape(spec.total // spec.length_x, spec.length_x)


def from_flat_grid(values, spec: GridSourceSpec, spacing=1.0) -> HeightField:
    """Cut a flat stream into rows of ``length_x`` values, scale, then pad."""
    grid = apply_scale(_reshape_stream(values, spec), spec.scale)
    pad_value = float(grid.min()) if spec.pad_value is None else spec.pad_value
    padded = pad_grid(grid, spec.pad_width, pad_value)
    if padded.shape[0] < 2 or padded.shape[1] < 2:
        raise ShapeMismatch(f"grid {padded.shape[0]}x{padded.shape[1]} is too small; add padding")
    return HeightField(padded, spacing=spacing)


def bound(v, lo=DEPTH_LO, hi=DEPTH_HI):
    """Keep in-range depths, send everything else to the far limit ``hi``."""
    v = np.asarray(v, dtype=np.float64)
    out = np.where((v >= lo) & (v <= hi), v, hi)
    return float(out) if out.ndim == 0 else out


def from_depth_grid(values, spec: GridSourceSpec, lo=DEPTH_LO, hi=DEPTH_HI, mirror=False,
                    invert=True, spacing=1.0) -> HeightField:
    """Depth-camera grid to relief.

    Depths are clamped with :func:`bound`, scaled and reshaped like
    :func:`from_flat_grid`, and bordered with ``hi*scale``.  ``mirror`` reverses
    each row to undo the camera's left-right flip.  With ``invert`` (default)
    the result is ``hi*scale - depth*scale`` so near things stand tall and the
    border sits at 0.  ``spec.pad_value`` is ignored.
    """
    if not 0 < lo < hi:
        raise HeightFieldError(f"need 0 < lo < hi, got lo={lo} hi={hi}")
    grid = _reshape_stream(values, spec)
    grid = apply_scale(bound(grid, lo, hi), spec.scale)
    far = float(apply_scale(hi, spec.scale))
    grid = pad_grid(grid, spec.pad_width, far)
    if mirror:
        grid = grid[:, ::-1]
    if invert:
        grid = far - grid
        if np.all(grid == 0.0):
            raise AllBelowFloor("every depth is out of range; nothing to print")
    return HeightField(np.ascontiguousarray(grid), spacing=spacing)


# file readers

def read_pgm(path_or_bytes) -> np.ndarray:
    """Read a P2 or P5 PGM into a float array scaled to [0, 1]."""
    if isinstance(path_or_bytes, (bytes, bytearray)):
        data, name = bytes(path_or_bytes), "<bytes>"
    else:
        data, name = Path(path_or_bytes).read_bytes(), str(path_or_bytes)
    magic = data[:2]
    if magic in (b"P1", b"P3", b"P4", b"P6"):
        raise UnsupportedRaster(f"{name}: {magic.decode()} is not grayscale; convert to PGM (P2/P5)")
    if magic not in (b"P2", b"P5"):
        raise UnsupportedRaster(f"{name}: not a PGM file")

    # header: magic, width, height, maxval separated by whitespace / comments
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise GridFormatError("truncated PGM header", name)
        try:
            fields.append(int(data[start:pos]))
        except ValueError:
            raise GridFormatError(f"bad PGM header field {data[start:pos]!r}", name) from None
    width, height, maxval = fields
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise GridFormatError(f"bad PGM dimensions {width}x{height} maxval {maxval}", name)
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[pos:pos + count * dtype.itemsize]
        if len(raw) < count * dtype.itemsize:
            raise GridFormatError("truncated PGM raster", name)
        px = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    else:
        text = re.sub(rb"#[^\n]*", b"", data[pos:])
        try:
            px = np.array([int(t) for t in text.split()], dtype=np.float64)
        except ValueError as exc:
            raise GridFormatError(f"bad PGM sample: {exc}", name) from None
        if px.size < count:
            raise GridFormatError(f"PGM has {px.size} samples, expected {count}", name)
        px = px[:count]
    return (px / maxval).reshape(height, width)


_SENTINEL = re.compile(r"^\[\s*0\s*,\s*0\s*,\s*0\s*\]$")


def read_grid_text(path_or_text, name=None):
    """Parse whitespace-separated numbers with optional ``Width N``/``Height M`` headers.

    Returns ``(values, width, height)``; width/height are ``None`` when absent.
    A trailing ``[0,0,0]`` line is dropped.
    """
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text
                                          and Path(path_or_text).exists()):
        name = name or str(path_or_text)
        text = Path(path_or_text).read_text()
    else:
        text = str(path_or_text)
    lines = text.splitlines()
    # trailing sentinel, ignoring blank lines after it
    last = len(lines) - 1
    while last >= 0 and not lines[last].strip():
        last -= 1
    if last >= 0 and _SENTINEL.match(lines[last].strip()):
        lines = lines[:last]
    width = height = None
    values = []
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s:
            continue
        head = s.split()
        if head[0].lower() in ("width", "height") and len(head) == 2:
            try:
                n = int(head[1])
            except ValueError:
                raise GridFormatError(f"bad {head[0]} header {head[1]!r}", name, lineno) from None
            if head[0].lower() == "width":
                width = n
            else:
                height = n
            continue
        for tok in s.replace(",", " ").split():
            try:
                values.append(float(tok))
            except ValueError:
                raise GridFormatError(f"not a number: {tok!r}", name, lineno) from None
    return np.array(values, dtype=np.float64), width, height
