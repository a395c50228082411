import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings, strategies as st
from shapely.geometry import LineString, Point, Polygon

from meshprint import geometry

SQUARE = np.array([[0, 0], [40, 0], [40, 40], [0, 40]], dtype=float)


@st.composite
def star_polygons(draw, n_max=14):
    """Counter-clockwise simple polygons: one radial sample per equal angular sector."""
    n = draw(st.integers(3, n_max))
    radii = np.array(draw(st.lists(st.floats(2.0, 10.0), min_size=n, max_size=n)))
    jitter = np.array(draw(st.lists(st.floats(0.0, 0.8), min_size=n, max_size=n)))
    angles = (np.arange(n) + jitter) * (2 * math.pi / n)
    return np.stack([np.cos(angles) * radii, np.sin(angles) * radii], axis=1)


def test_signed_area_and_perimeter():
    assert geometry.signed_area(SQUARE) == 1600
    assert geometry.signed_area(SQUARE[::-1]) == -1600
    assert geometry.perimeter(SQUARE) == 160


@given(star_polygons())
@settings(max_examples=80, deadline=None)
def test_area_matches_shapely(poly):
    assert geometry.signed_area(poly) == pytest.approx(Polygon(poly).area, rel=1e-9)


@given(star_polygons(), st.lists(st.tuples(st.floats(-11, 11), st.floats(-11, 11)), min_size=1, max_size=30))
@settings(max_examples=60, deadline=None)
def test_containment_matches_shapely(poly, pts):
    shape = Polygon(poly)
    got = geometry.points_in_polygon(np.array(pts), poly)
    for (x, y), inside in zip(pts, got):
        if shape.exterior.distance(Point(x, y)) < 1e-9:
            continue
        assert inside == shape.contains(Point(x, y))


def test_bowtie_is_not_simple():
    bow = np.array([[0, 0], [2, 2], [2, 0], [0, 2]], dtype=float)
    assert not geometry.is_simple(bow)
    assert geometry.is_simple(SQUARE)


def test_touching_vertex_is_not_simple():
    pinched = np.array([[0, 0], [2, 0], [1, 1], [2, 2], [0, 2], [1, 1]], dtype=float)
    assert not geometry.is_simple(pinched)


@given(star_polygons())
@settings(max_examples=60, deadline=None)
def test_simplicity_matches_shapely(poly):
    assert geometry.is_simple(poly) == LineString(np.vstack([poly, poly[:1]])).is_simple


def test_rotate_to_lexmin():
    p = np.array([[3, 1], [1, 2], [1, 0], [2, 5]], dtype=float)
    np.testing.assert_array_equal(geometry.rotate_to_lexmin(p), [[1, 0], [2, 5], [3, 1], [1, 2]])


def test_drop_collinear():
    p = np.array([[0, 0], [1, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    assert len(geometry.drop_collinear(p)) == 4


def test_square_inset():
    inset = geometry.offset_polygon(SQUARE, 0.2)
    assert geometry.signed_area(inset) == pytest.approx(39.6 ** 2)
    assert geometry.perimeter(inset) == pytest.approx(158.4)


def test_hole_grows():
    hole = np.array([[10, 10], [10, 20], [20, 20], [20, 10]], dtype=float)  # clockwise
    grown = geometry.offset_polygon(hole, 0.2)
    assert geometry.signed_area(grown) == pytest.approx(-(10.4 ** 2))
    assert geometry.point_in_polygon((9.9, 15.0), grown)


def test_vanishing_offset():
    tiny = SQUARE * 0.005  # 0.2 mm square
    assert geometry.offset_polygon(tiny, 0.2) is None


@given(star_polygons(), st.floats(0.05, 0.6))
@settings(max_examples=80, deadline=None)
def test_inset_agrees_with_shapely_buffer(poly, d):
    """With bevels disabled the inset matches a mitred buffer of the same distance."""
    out = geometry.offset_polygon(poly, d, miter_limit=1e9)
    ref = Polygon(poly).buffer(-d, join_style="mitre", mitre_limit=1e9)
    if out is None:
        return
    assert geometry.is_simple(out)
    assert geometry.signed_area(out) > 0
    # every inset vertex sits at least d (less rounding) inside the original boundary
    boundary = Polygon(poly).exterior
    for x, y in out:
        assert Polygon(poly).contains(Point(x, y))
        assert boundary.distance(Point(x, y)) >= d - 1e-7
    if isinstance(ref, Polygon) and not ref.is_empty:
        assert Polygon(out).area == pytest.approx(ref.area, rel=1e-6, abs=1e-9)


@given(star_polygons(), st.floats(-9.5, 9.5))
@settings(max_examples=80, deadline=None)
def test_scanline_matches_shapely(poly, y):
    got = geometry.scanline_intervals([poly], y)
    line = LineString([(-20, y), (20, y)])
    inter = shapely.intersection(Polygon(poly), line)
    length = sum(b - a for a, b in got)
    assert length == pytest.approx(inter.length, abs=1e-9)


def test_scanline_square_with_hole():
    hole = np.array([[10, 10], [10, 20], [20, 20], [20, 10]], dtype=float)
    assert geometry.scanline_intervals([SQUARE, hole], 15.0) == [(0.0, 10.0), (20.0, 40.0)]
