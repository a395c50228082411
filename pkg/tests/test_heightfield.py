import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meshprint import expr, heightfield as hf
from meshprint.errors import (
    AllBelowFloor, EmptyDomain, GridFormatError, NonFiniteValue, ShapeMismatch, UnsupportedRaster,
)


def test_hemisphere_lattice_shape(hemisphere_field):
    assert (hemisphere_field.rows, hemisphere_field.cols) == (101, 101)
    assert hemisphere_field.spacing == pytest.approx(0.2)


def test_hemisphere_peak_and_rim(hemisphere_field):
    h = hemisphere_field.heights
    assert h.max() == 10.0
    assert h[50, 50] == 10.0
    # corners lie outside the disc and are held at the floor
    assert h[0, 0] == h[-1, -1] == 0.0


def test_sample_positions_follow_origin_and_spacing():
    e = expr.parse_expression("x + 10*y")
    h = hf.from_function(e, 1, 2, 3, 4, 2)
    xs = 1 + np.arange(3) * 0.5
    ys = 3 + np.arange(3) * 0.5
    np.testing.assert_array_equal(h.heights, xs[None, :] + 10 * ys[:, None])
    np.testing.assert_array_equal(h.xs, xs)
    np.testing.assert_array_equal(h.ys, ys)


def test_region_truncates_to_floor():
    e = expr.parse_expression("5")
    region = expr.parse_expression("1 - x^2 - y^2")
    h = hf.from_function(e, -2, 2, -2, 2, 1, region=region, floor=1.0)
    assert h.heights[2, 2] == 5.0
    assert h.heights[0, 0] == 1.0
    assert set(np.unique(h.heights)) == {1.0, 5.0}


def test_empty_domain():
    e = expr.parse_expression("x")
    with pytest.raises(EmptyDomain):
        hf.from_function(e, 1, 1, 0, 1, 5)


def test_all_below_floor():
    e = expr.parse_expression("sqrt(-1 - x^2)")
    with pytest.raises(AllBelowFloor):
        hf.from_function(e, -1, 1, -1, 1, 2)


def test_image_binarizes_and_pads():
    px = np.array([[0.0, 0.2], [0.7, 1.0]])
    h = hf.from_image(px, threshold=0.5)
    assert h.heights.shape == (6, 6)
    np.testing.assert_array_equal(h.heights[2:4, 2:4], [[0, 0], [10, 10]])
    assert h.heights[[0, 1, 4, 5], :].sum() == 0


def test_image_rejects_color():
    with pytest.raises(UnsupportedRaster):
        hf.from_image(np.zeros((3, 3, 3)))


def test_flat_grid_recipe():
    values = np.arange(2500, dtype=float) + 100
    h = hf.from_flat_grid(values, hf.GridSourceSpec(50, 2500, hf.ELEVATION_SCALE, 2))
    assert h.heights.shape == (54, 54)
    np.testing.assert_array_equal(h.heights[2:-2, 2:-2], values.reshape(50, 50) / 50)
    assert np.all(h.heights[:2] == 100 / 50)


def test_explicit_border_value():
    h = hf.from_flat_grid([3, 4, 5, 6], hf.GridSourceSpec(2, 4, 1.0, 1, 0.5))
    assert h.heights[0, 0] == 0.5


@given(st.integers(-10**6, 10**6), st.integers(1, 1000))
@settings(max_examples=200, deadline=None)
def test_reciprocal_scale_is_exact_division(v, k):
    assert hf.apply_scale(float(v), 1 / k) == v / k


def test_other_scales_multiply():
    assert hf.apply_scale(3.0, 0.3) == 3.0 * 0.3


def test_flat_grid_rows_are_consecutive_runs():
    h = hf.from_flat_grid([1, 2, 3, 4, 5, 6], hf.GridSourceSpec(3, 6, 1.0, 0))
    np.testing.assert_array_equal(h.heights, [[1, 2, 3], [4, 5, 6]])


def test_flat_grid_errors():
    with pytest.raises(ShapeMismatch):
        hf.GridSourceSpec(7, 2500)
    with pytest.raises(ShapeMismatch):
        hf.from_flat_grid(np.ones(10), hf.GridSourceSpec(5, 25))
    with pytest.raises(NonFiniteValue) as info:
        hf.from_flat_grid([1, 2, float("nan"), 4], hf.GridSourceSpec(2, 4))
    assert info.value.index == 2


@pytest.mark.parametrize("v, want", [(10, 1500), (20, 20), (700, 700), (1500, 1500), (2000, 1500), (0, 1500)])
def test_bound(v, want):
    assert hf.bound(v) == want


def test_depth_grid_inverts_and_borders():
    values = [100, 2000, 700, 10]
    h = hf.from_depth_grid(values, hf.GridSourceSpec(2, 4, hf.DEPTH_SCALE, 1))
    # border and out-of-range depths sit at the far limit, i.e. height 0
    want = 150 - np.array([[150, 150, 150, 150],
                           [150, 10, 150, 150],
                           [150, 70, 150, 150],
                           [150, 150, 150, 150]])
    np.testing.assert_allclose(h.heights, want, rtol=0, atol=1e-12)


def test_depth_grid_mirror_reverses_rows():
    values = [100, 200, 300, 400]
    plain = hf.from_depth_grid(values, hf.GridSourceSpec(2, 4, 0.1, 0))
    flipped = hf.from_depth_grid(values, hf.GridSourceSpec(2, 4, 0.1, 0), mirror=True)
    np.testing.assert_array_equal(flipped.heights, plain.heights[:, ::-1])


def test_depth_grid_all_out_of_range():
    with pytest.raises(AllBelowFloor):
        hf.from_depth_grid([1, 5, 3000, 9999], hf.GridSourceSpec(2, 4, 0.1, 2))


def test_pgm_ascii_and_binary(tmp_path):
    p2 = b"P2\n# comment\n3 2\n255\n0 128 255\n10 20 30\n"
    px = hf.read_pgm(p2)
    np.testing.assert_allclose(px, np.array([[0, 128, 255], [10, 20, 30]]) / 255)
    p5 = b"P5\n2 1\n65535\n" + np.array([0, 65535], dtype=">u2").tobytes()
    np.testing.assert_array_equal(hf.read_pgm(p5), [[0.0, 1.0]])
    path = tmp_path / "x.pgm"
    path.write_bytes(p2)
    np.testing.assert_array_equal(hf.read_pgm(path), px)


@pytest.mark.parametrize("magic", [b"P3", b"P6", b"P1"])
def test_pgm_color_rejected(magic):
    with pytest.raises(UnsupportedRaster):
        hf.read_pgm(magic + b"\n1 1\n255\n0 0 0\n")


def test_grid_text_headers_and_sentinel():
    text = "Width 3\nHeight 2\n1 2 3\n4 5 6\n[0,0,0]\n"
    values, w, h = hf.read_grid_text(text)
    assert (w, h) == (3, 2)
    np.testing.assert_array_equal(values, [1, 2, 3, 4, 5, 6])


def test_grid_text_bad_token_reports_line(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("1 2\n3 oops\n")
    with pytest.raises(GridFormatError) as info:
        hf.read_grid_text(p)
    assert info.value.line == 2
    assert "g.txt" in str(info.value)


def test_negative_heights_rejected():
    with pytest.raises(Exception, match="shift or rescale"):
        hf.HeightField([[-1.0, 0.0], [0.0, 0.0]])


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 4), st.floats(0.0, 50.0))
@settings(max_examples=60, deadline=None)
def test_padding_shape_and_border(rows, cols, pad, value):
    grid = np.arange(rows * cols, dtype=float).reshape(rows, cols)
    out = hf.pad_grid(grid, pad, value)
    assert out.shape == (rows + 2 * pad, cols + 2 * pad)
    np.testing.assert_array_equal(out[pad:pad + rows, pad:pad + cols], grid)
    mask = np.ones(out.shape, dtype=bool)
    mask[pad:pad + rows, pad:pad + cols] = False
    assert np.all(out[mask] == value)


@given(st.floats(-5, 5), st.floats(0.1, 5), st.floats(0.5, 8))
@settings(max_examples=60, deadline=None)
def test_lattice_covers_domain(xmin, width, res):
    e = expr.parse_expression("1")
    if width * res + 1e-9 < 1:
        with pytest.raises(EmptyDomain):
            hf.from_function(e, xmin, xmin + width, 0, width, res)
        return
    h = hf.from_function(e, xmin, xmin + width, 0, width, res)
    assert h.cols == math.floor(width * res + 1e-9) + 1
    assert h.xs[-1] <= xmin + width + 1e-9
