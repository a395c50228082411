"""Per-layer SVG plots of contours and extruder moves, one user unit per millimetre."""
from __future__ import annotations

from pathlib import Path

from .errors import CanvasTooSmall

OUTER_COLOR = "#1f5fbf"
HOLE_COLOR = "#d9480f"
EXTRUDE_COLOR = "#2b8a3e"
TRAVEL_COLOR = "#868e96"
OPEN_END_COLOR = "#e03131"
FILENAME = "layer_{:04d}.svg"
MARGIN = 2.0


def _f(v):
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pt(x, y):
    # y flips so the plot reads as a plan view
    return f"{_f(x)} {_f(-y)}"


def layer_bounds(layer, moves=()):
    xs, ys = [], []
    for c in layer.contours:
        xs.extend(c.vertices[:, 0].tolist())
        ys.extend(c.vertices[:, 1].tolist())
    for m in moves:
        xs += [m.start[0], m.end[0]]
        ys += [m.start[1], m.end[1]]
    for x, y in layer.open_ends:
        xs.append(x)
        ys.append(y)
    if not xs:
        return None
    return min(xs), min(ys), max(xs), max(ys)


def render_layer_svg(layer, moves=None, canvas=None) -> str:
    """SVG 1.1 text for one layer.

    ``canvas`` is ``(xmin, ymin, xmax, ymax)`` in mm; by default it is the
    drawing's bounding box plus a small margin.  Travel moves are dashed and
    dangling contour ends are marked with circles.
    """
    moves = list(moves or ())
    bb = layer_bounds(layer, moves)
    if canvas is None:
        canvas = (0.0, 0.0, 1.0, 1.0) if bb is None else (
            bb[0] - MARGIN, bb[1] - MARGIN, bb[2] + MARGIN, bb[3] + MARGIN)
    x0, y0, x1, y1 = map(float, canvas)
    if not (x1 > x0 and y1 > y0):
        raise CanvasTooSmall(f"canvas {canvas} has no area")
    if bb is not None and (bb[0] < x0 or bb[1] < y0 or bb[2] > x1 or bb[3] > y1):
        raise CanvasTooSmall(f"layer spans {tuple(round(v, 4) for v in bb)}, canvas is {canvas}")
    w, h = x1 - x0, y1 - y0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(w)}mm" height="{_f(h)}mm" '
        f'viewBox="{_f(x0)} {_f(-y1)} {_f(w)} {_f(h)}">',
        f'<title>layer z={_f(layer.z)}</title>',
        f'<rect class="frame" x="{_f(x0)}" y="{_f(-y1)}" width="{_f(w)}" height="{_f(h)}" '
        'fill="none" stroke="#000000" stroke-width="0.1"/>',
    ]
    for c in layer.contours:
        pts = c.vertices.tolist()
        d = "M " + _pt(*pts[0]) + "".join(" L " + _pt(*p) for p in pts[1:]) + " Z"
        color = OUTER_COLOR if c.role == "outer" else HOLE_COLOR
        out.append(f'<path class="{c.role}" d="{d}" fill="none" stroke="{color}" stroke-width="0.15"/>')
    run = []

    def flush():
        if run:
            d = "M " + _pt(*run[0]) + "".join(" L " + _pt(*p) for p in run[1:])
            out.append(f'<path class="extrude" d="{d}" fill="none" stroke="{EXTRUDE_COLOR}" '
                       'stroke-width="0.1" stroke-linejoin="round"/>')
            run.clear()

    for m in moves:
        if m.kind == "extrude":
            if not run:
                run.append(m.start)
            run.append(m.end)
            continue
        flush()
        out.append(f'<line class="travel" x1="{_f(m.start[0])}" y1="{_f(-m.start[1])}" '
                   f'x2="{_f(m.end[0])}" y2="{_f(-m.end[1])}" stroke="{TRAVEL_COLOR}" '
                   'stroke-width="0.05" stroke-dasharray="0.4 0.3"/>')
    flush()
    for x, y in layer.open_ends:
        out.append(f'<circle class="open-end" cx="{_f(x)}" cy="{_f(-y)}" r="0.5" '
                   f'fill="none" stroke="{OPEN_END_COLOR}" stroke-width="0.2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_layer_svgs(layers, directory, toolpath=None, canvas=None):
    """Write ``layer_0000.svg`` and onwards; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    by_plane = {}
    if toolpath is not None:
        by_plane = {lp.plane_z: lp.moves for lp in toolpath.layers if lp.plane_z is not None}
    paths = []
    for i, layer in enumerate(layers):
        p = directory / FILENAME.format(i)
        p.write_text(render_layer_svg(layer, by_plane.get(layer.z), canvas))
        paths.append(p)
    return paths
