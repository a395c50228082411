"""The compiled and numpy kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from meshprint import _pykernels, kernels

compiled = pytest.importorskip("meshprint._ckernels")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_vertex_on_plane_counts_as_above():
    tri = np.array([[[0, 0, 0], [2, 0, 2], [0, 2, 1]]], dtype=float)
    seg = compiled.slice_facets(tri, 1.0)
    # the on-plane vertex yields itself exactly
    assert [0.0, 2.0] in seg[0].tolist()


def test_flat_facet_on_plane_gives_nothing():
    tri = np.array([[[0, 0, 1], [1, 0, 1], [0, 1, 1]]], dtype=float)
    assert len(compiled.slice_facets(tri, 1.0)) == 0
    assert len(_pykernels.slice_facets(tri, 1.0)) == 0


finite = st.floats(-100, 100, allow_nan=False, width=64)


@given(st.lists(st.tuples(*[finite] * 9), min_size=1, max_size=40), st.floats(-100, 100))
@settings(max_examples=150, deadline=None)
def test_slice_parity(rows, z):
    tris = np.ascontiguousarray(np.array(rows, dtype=np.float64).reshape(-1, 3, 3))
    a = compiled.slice_facets(tris, z)
    b = _pykernels.slice_facets(tris, z)
    assert a.shape == b.shape
    assert a.tobytes() == b.tobytes()


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=3, max_size=12))
@settings(max_examples=150, deadline=None)
def test_crossing_parity(pts):
    p = np.ascontiguousarray(np.array(pts, dtype=np.float64))
    assert tuple(compiled.first_crossing(p)) == tuple(_pykernels.first_crossing(p))


def test_crossing_parity_on_meshes(hemisphere):
    from meshprint import slicer
    layer = slicer.slice_at(hemisphere, 4.9)
    v = np.ascontiguousarray(layer.contours[0].vertices)
    assert compiled.first_crossing(v) == _pykernels.first_crossing(v) == (-1, -1)
    tris = np.ascontiguousarray(hemisphere.vertices)
    assert compiled.slice_facets(tris, 4.9).tobytes() == _pykernels.slice_facets(tris, 4.9).tobytes()
