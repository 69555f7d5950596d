import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from obstacle_mcf.errors import EmptyContourError, ExtinctError
from obstacle_mcf.grid import Grid
from obstacle_mcf.initial_data import Sphere, build_initial_field
from obstacle_mcf.mcf_oracle import (
    extinction_time,
    extract_zero_level,
    hausdorff_distance,
    radius_estimate,
    sphere_radius_exact,
)
from obstacle_mcf.solver import PhaseState


def test_sphere_radius_exact():
    assert sphere_radius_exact(0.5, 2, 0.04) == pytest.approx(math.sqrt(0.25 - 0.08))
    assert sphere_radius_exact(0.5, 3, 0.02) == pytest.approx(math.sqrt(0.25 - 0.08))
    assert sphere_radius_exact(0.5, 2, 0.0) == 0.5
    assert extinction_time(0.5, 2) == 0.125
    with pytest.raises(ExtinctError):
        sphere_radius_exact(0.5, 2, 0.125)
    with pytest.raises(ValueError):
        sphere_radius_exact(0.5, 1, 0.0)


def _bracketing(field, grid, verts):
    # each vertex lies on a grid edge whose end values bracket zero (0 counts as +)
    idx = (verts - grid.lower) / grid.h
    pos = field >= 0
    for p in idx:
        base = np.floor(p + 1e-9).astype(int)
        frac = p - base
        moving = np.flatnonzero(frac > 1e-9)
        assert len(moving) <= 1
        if not len(moving):
            continue
        ax = moving[0]
        other = base.copy()
        other[ax] += 1
        assert pos[tuple(base)] != pos[tuple(other)]


@given(st.floats(0.2, 0.6), st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
@settings(max_examples=20, deadline=None)
def test_circle_initial_radius_within_h(r0, cx, cy):
    g = Grid.cube(2, 161, 2.0)
    eps = 0.05
    phi = build_initial_field(g, Sphere((cx, cy), r0), eps)
    c = extract_zero_level(field=phi, grid=g)
    mean, dev = radius_estimate(c, (cx, cy))
    assert abs(mean - r0) <= g.h
    assert hausdorff_distance(c, (cx, cy), r0) <= g.h
    _bracketing(phi, g, c.vertices)


def test_sign_flip_gives_same_vertices():
    g = Grid.cube(2, 81, 2.0)
    phi = build_initial_field(g, Sphere((0.0, 0.0), 0.5), 0.1)
    a = extract_zero_level(field=phi, grid=g).vertices
    b = extract_zero_level(field=-phi, grid=g).vertices
    np.testing.assert_allclose(np.sort(a, axis=0), np.sort(b, axis=0), atol=1e-12)


def test_paths_are_closed_polylines():
    g = Grid.cube(2, 81, 2.0)
    phi = build_initial_field(g, Sphere((0.0, 0.0), 0.5), 0.1)
    c = extract_zero_level(field=phi, grid=g)
    assert len(c.paths) == 1
    p = c.paths[0]
    np.testing.assert_allclose(p[0], p[-1])


def test_sphere_3d():
    g = Grid.cube(3, 41, 2.0)
    phi = build_initial_field(g, Sphere((0.0, 0.0, 0.0), 0.5), 0.1)
    st_ = PhaseState(phi, g, 0.1, None, 0.0, "projection")
    c = extract_zero_level(st_)
    assert c.faces is not None and c.faces.shape[1] == 3
    mean, _ = radius_estimate(c, (0, 0, 0))
    assert abs(mean - 0.5) <= g.h


def test_empty_contour():
    g = Grid.cube(2, 32, 1.0)
    with pytest.raises(EmptyContourError):
        extract_zero_level(field=np.ones(g.shape), grid=g)
    # zeros count as positive, so a field of zeros and ones has no crossing
    with pytest.raises(EmptyContourError):
        extract_zero_level(field=np.zeros(g.shape), grid=g)


def test_contour_csv(tmp_path):
    g = Grid.cube(2, 81, 2.0)
    phi = build_initial_field(g, Sphere((0.0, 0.0), 0.5), 0.1)
    c = extract_zero_level(field=phi, grid=g)
    path = tmp_path / "c.csv"
    c.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,x2"
    back = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(back, c.vertices)
