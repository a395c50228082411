import struct
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meshprint import mesh, stl_io
from meshprint.errors import HeaderLooksAscii, MissingEndSolid, ParseError, TruncatedFile

from conftest import height_grids


def _blocks(text):
    """Non-blank lines with their exact leading whitespace."""
    return [line for line in text.splitlines() if line.strip()]


def test_ascii_matches_listing_lines(cube_listing_text):
    ours = stl_io.write_ascii(mesh.listing_cube()).decode()
    ref = _blocks(cube_listing_text)
    got = _blocks(ours)
    # the listing closes with a bare "endsolid"; everything before it is identical
    assert got[:-1] == ref[:-1]
    assert got[-1] == "endsolid mycube"
    assert ref[-1] == "endsolid"


def test_ascii_indentation():
    text = stl_io.write_ascii(mesh.listing_cube()).decode()
    for line in text.splitlines():
        word = line.split()[0]
        indent = len(line) - len(line.lstrip(" "))
        assert indent == {"solid": 0, "endsolid": 0, "facet": 2, "endfacet": 2,
                          "outer": 4, "endloop": 4, "vertex": 6}[word]
    assert text.endswith("endsolid mycube\n")
    assert "\n\n" not in text


def test_format_number():
    assert stl_io.format_number(40) == "40.0"
    assert stl_io.format_number(-0.0) == "-0.0"
    assert stl_io.format_number(1e-20) == "1.0e-20"
    assert stl_io.format_number(0.1) == "0.1"
    with pytest.raises(ValueError):
        stl_io.format_number(float("nan"))


def test_read_free_form_whitespace():
    text = "solid  t\n\n facet   normal 0 0 1\nouter loop\n vertex 0 0 0\nvertex 1 0 0\n\tvertex 0 1 0\n endloop\nendfacet\nendsolid t"
    m = stl_io.read_ascii(text)
    assert len(m) == 1
    assert m.name == "t"


def _facet(extra=""):
    return ("  facet normal 0 0 1\n    outer loop\n      vertex 0 0 0\n      vertex 1 0 0\n"
            f"      vertex 0 1 0\n{extra}    endloop\n  endfacet\n")


def test_fourth_vertex_rejected():
    text = "solid x\n" + _facet("      vertex 1 1 0\n") + "endsolid x\n"
    with pytest.raises(ParseError) as info:
        stl_io.read_ascii(text)
    assert info.value.line == 7
    assert "fourth vertex" in str(info.value)


def test_missing_endsolid():
    with pytest.raises(MissingEndSolid):
        stl_io.read_ascii("solid x\n" + _facet())


def test_non_numeric_field_line_number():
    text = "solid x\n" + _facet().replace("vertex 1 0 0", "vertex 1 zero 0") + "endsolid x\n"
    with pytest.raises(ParseError) as info:
        stl_io.read_ascii(text)
    assert info.value.line == 5


def test_binary_layout():
    cube = mesh.listing_cube()
    data = stl_io.write_binary(cube)
    assert len(data) == 84 + 50 * 12
    assert struct.unpack_from("<I", data, 80)[0] == 12
    nx, ny, nz = struct.unpack_from("<3f", data, 84)
    assert (nx, ny, nz) == (0.0, -1.0, 0.0)
    assert struct.unpack_from("<9f", data, 96)[:3] == (0.0, 0.0, 0.0)
    assert struct.unpack_from("<H", data, 84 + 48)[0] == 0


def test_truncated_binary():
    data = stl_io.write_binary(mesh.listing_cube())
    with pytest.raises(TruncatedFile):
        stl_io.read_binary(data[:-10])
    with pytest.raises(TruncatedFile):
        stl_io.read_binary(data[:40])


def test_solid_header_warns_but_reads():
    data = stl_io.write_binary(mesh.listing_cube(), header=b"x")
    data = b"solid binary in disguise".ljust(80) + data[80:]
    with pytest.warns(HeaderLooksAscii):
        m = stl_io.read_binary(data)
    assert len(m) == 12
    assert stl_io.is_binary(data)


def test_detection(tmp_path):
    cube = mesh.listing_cube()
    a, b = tmp_path / "a.stl", tmp_path / "b.stl"
    stl_io.write_stl(cube, a)
    stl_io.write_stl(cube, b, binary=True)
    assert stl_io.read_stl(a) == cube
    assert np.array_equal(stl_io.read_stl(b).vertices, cube.vertices)


@st.composite
def meshes(draw):
    grid = draw(height_grids(max_side=4))
    spacing = draw(st.floats(0.01, 100, allow_nan=False))
    dx = draw(st.floats(-1e3, 1e3, allow_nan=False))
    from meshprint import heightfield
    m = mesh.tessellate_heightfield(heightfield.HeightField(grid * spacing, spacing=spacing, origin=(dx, -dx)))
    return m.with_name(draw(st.sampled_from(["", "part", "my part"])))


@given(meshes())
@settings(max_examples=60, deadline=None)
def test_ascii_round_trip_bit_exact(m):
    back = stl_io.read_ascii(stl_io.write_ascii(m))
    assert back == m
    assert back.name == m.name


@given(meshes())
@settings(max_examples=60, deadline=None)
def test_binary_round_trip_after_float32(m):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        back = stl_io.read_binary(stl_io.write_binary(m))
    np.testing.assert_array_equal(back.vertices, m.vertices.astype(np.float32).astype(np.float64))
    np.testing.assert_array_equal(back.normals, m.normals.astype(np.float32).astype(np.float64))
