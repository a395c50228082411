from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from meshprint import expr, heightfield, mesh

DATA = Path(__file__).parent / "data"
HEMISPHERE_FN = "10*sqrt(max(0,1-(x/10)^2-(y/10)^2))"


@pytest.fixture(scope="session")
def cube_listing_text():
    return (DATA / "cube_listing.stl").read_text()


@pytest.fixture(scope="session")
def hemisphere_field():
    e = expr.parse_expression(HEMISPHERE_FN)
    return heightfield.from_function(e, -10, 10, -10, 10, 5)


@pytest.fixture(scope="session")
def hemisphere(hemisphere_field):
    return mesh.tessellate_heightfield(hemisphere_field)


@pytest.fixture(scope="session")
def slab():
    """Constant-height 40 x 40 x 10 solid."""
    return mesh.tessellate_heightfield(heightfield.HeightField([[10.0, 10.0], [10.0, 10.0]], spacing=40.0))


def random_padded_field(rng, max_side=9, pad=2, levels=(0.5, 6.0)):
    """Random heights with a constant positive border, so every slice is bounded."""
    rows, cols = rng.integers(1, max_side, size=2)
    inner = rng.uniform(*levels, size=(rows, cols))
    border = float(rng.uniform(0.2, levels[0]))
    grid = np.pad(inner, pad, constant_values=border)
    return heightfield.HeightField(grid, spacing=float(rng.uniform(0.5, 3.0)))


@st.composite
def height_grids(draw, max_side=6):
    rows = draw(st.integers(2, max_side))
    cols = draw(st.integers(2, max_side))
    vals = draw(st.lists(st.integers(1, 20), min_size=rows * cols, max_size=rows * cols))
    return np.array(vals, dtype=np.float64).reshape(rows, cols) / 2


def tetrahedron(a, b, c, d):
    """Closed tetrahedron with outward winding whatever the vertex order."""
    pts = np.array([a, b, c, d], dtype=np.float64)
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    tris = np.array([[pts[i], pts[j], pts[k]] for i, j, k in faces])
    m = mesh.TriangleMesh(tris)
    if mesh.signed_volume(m) < 0:
        m = mesh.TriangleMesh(tris[:, [0, 2, 1]])
    return m


def bowtie_mesh():
    """Two tetrahedra sharing a vertical edge; mid-height slices touch at a point."""
    top, bottom = (0.0, 0.0, 10.0), (0.0, 0.0, 0.0)
    left = tetrahedron(bottom, top, (-10.0, -5.0, 5.0), (-10.0, 5.0, 5.0))
    right = tetrahedron(bottom, top, (10.0, -5.0, 5.0), (10.0, 5.0, 5.0))
    return mesh.TriangleMesh(np.concatenate([left.vertices, right.vertices]))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
