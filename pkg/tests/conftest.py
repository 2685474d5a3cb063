import numpy as np
import pytest

from sfemdmp.mesh import SurfaceMesh, generate_hemisphere, generate_semitorus

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def hemispheres():
    return {level: generate_hemisphere(level) for level in range(5)}


@pytest.fixture(scope="session")
def semitorus_base():
    return generate_semitorus(5.0, 2.0, 9, 4)


def hexagon_fan(radius=1.0):
    """Six equilateral triangles of side ``radius`` around the origin (planar)."""
    ang = np.arange(6) * np.pi / 3
    vertices = np.vstack([[0.0, 0.0, 0.0], np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(6)])])
    triangles = [[0, 1 + k, 1 + (k + 1) % 6] for k in range(6)]
    return SurfaceMesh.from_arrays(vertices, triangles)


def planar_fan(boundary_xy):
    """Fan around the origin through the given counterclockwise boundary points."""
    pts = np.asarray(boundary_xy, dtype=float)
    vertices = np.vstack([[0.0, 0.0, 0.0], np.column_stack([pts, np.zeros(len(pts))])])
    k = len(pts)
    triangles = [[0, 1 + j, 1 + (j + 1) % k] for j in range(k)]
    return SurfaceMesh.from_arrays(vertices, triangles)
