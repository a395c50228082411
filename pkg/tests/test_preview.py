import re
import xml.etree.ElementTree as ET

import pytest

from meshprint import mesh, preview, slicer, toolpath as tpm
from meshprint.errors import CanvasTooSmall
from meshprint.slicer import Layer

SVG = "{http://www.w3.org/2000/svg}"


def _paths(svg, cls):
    root = ET.fromstring(svg)
    return [e for e in root.iter(f"{SVG}path") if e.get("class") == cls]


def _numbers(d):
    return re.findall(r"-?\d+(?:\.\d+)?", d)


def test_cube_layer_single_square():
    layer = slicer.slice_mesh(mesh.listing_cube(), 10)[0]
    svg = preview.render_layer_svg(layer)
    (p,) = _paths(svg, "outer")
    d = p.get("d")
    assert d.startswith("M ") and d.endswith(" Z")
    assert d.count(" L ") == 3
    assert len(_numbers(d)) == 2 * 4


def test_empty_layer_is_frame_only():
    root = ET.fromstring(preview.render_layer_svg(Layer(1.0)))
    assert root.get("version") == "1.1"
    kinds = [e.tag.replace(SVG, "") for e in root if e.tag != f"{SVG}title"]
    assert kinds == ["rect"]


def test_y_axis_points_up():
    layer = slicer.slice_mesh(mesh.box(10, 20, 5), 1.0)[0]
    (p,) = _paths(preview.render_layer_svg(layer), "outer")
    ys = [float(v) for v in _numbers(p.get("d"))[1::2]]
    assert min(ys) == -20 and max(ys) == 0


def test_vertex_count_matches(hemisphere):
    for layer in slicer.slice_mesh(hemisphere, 2.0):
        svg = preview.render_layer_svg(layer)
        for c, p in zip(layer.contours, _paths(svg, "outer") + _paths(svg, "hole")):
            assert len(_numbers(p.get("d"))) == 2 * len(c)


def test_moves_styled(slab):
    layers = slicer.slice_mesh(slab, 5.0)
    tp = tpm.plan_toolpath(layers, tpm.PrintConfig(layer_thickness=5.0))
    svg = preview.render_layer_svg(layers[0], tp.layers[0].moves)
    root = ET.fromstring(svg)
    travel = [e for e in root.iter(f"{SVG}line") if e.get("class") == "travel"]
    assert travel and all(e.get("stroke-dasharray") for e in travel)
    extrude = _paths(svg, "extrude")
    outer = _paths(svg, "outer")
    assert extrude and extrude[0].get("stroke") != outer[0].get("stroke")


def test_open_ends_marked(slab):
    holed = mesh.TriangleMesh(slab.vertices[4:])
    layer = slicer.slice_mesh(holed, 2.0, check=False, force=True)[0]
    assert layer.open_ends
    root = ET.fromstring(preview.render_layer_svg(layer))
    marks = [e for e in root.iter(f"{SVG}circle") if e.get("class") == "open-end"]
    assert len(marks) == len(layer.open_ends)


def test_canvas_too_small():
    layer = slicer.slice_mesh(mesh.listing_cube(), 10)[0]
    with pytest.raises(CanvasTooSmall):
        preview.render_layer_svg(layer, canvas=(0, 0, 20, 20))
    preview.render_layer_svg(layer, canvas=(-1, -1, 41, 41))


def test_filenames(tmp_path, hemisphere):
    layers = slicer.slice_mesh(hemisphere, 2.5)
    paths = preview.write_layer_svgs(layers, tmp_path)
    assert [p.name for p in paths] == [f"layer_{i:04d}.svg" for i in range(len(layers))]
    for p in paths:
        ET.parse(p)
