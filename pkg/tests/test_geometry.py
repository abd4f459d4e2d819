import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tacsim.errors import GeometryError, UnreachableVolumeError
from tacsim.geometry import (Annulus, Cylinder, FlatPlate, GearFace, Grid, PenetrationModel, Pose2D, Sphere,
                             intersection_volume, rasterize, shape_from_dict, shape_to_dict,
                             solve_penetration_depth)

R_BALL = 1.97


def cap_volume(radius, d):
    return math.pi * d * d * (3 * radius - d) / 3


def pixel_xy(grid, row, col):
    return ((col - 0.5 * (grid.width_px - 1)) * grid.pixel_pitch,
            (row - 0.5 * (grid.height_px - 1)) * grid.pixel_pitch)


def test_flat_plate_covering_grid_touches_everywhere(grid):
    hf = rasterize(FlatPlate(100.0, 100.0), Pose2D(), grid)
    assert hf.gap.shape == (240, 320)
    assert np.all(hf.gap == 0.0)


def test_sphere_gap_matches_geometry(grid):
    hf = rasterize(Sphere(R_BALL), Pose2D(), grid)
    # even grid: the apex sits between the four centre pixels
    centre = hf.gap[119:121, 159:161]
    x, y = pixel_xy(grid, 119, 159)
    np.testing.assert_allclose(centre, R_BALL - math.sqrt(R_BALL ** 2 - x * x - y * y), rtol=1e-12)
    for row, col in [(120, 180), (100, 150), (140, 170)]:
        x, y = pixel_xy(grid, row, col)
        rho2 = x * x + y * y
        assert hf.gap[row, col] == pytest.approx(R_BALL - math.sqrt(R_BALL ** 2 - rho2), rel=1e-12)
    assert np.isinf(hf.gap[0, 0])


def test_sphere_apex_touches_on_odd_grid():
    hf = rasterize(Sphere(R_BALL), Pose2D(), Grid(11, 11, 0.1))
    assert hf.gap[5, 5] == 0.0


def test_cylinder_gap_pointwise(grid):
    radius = 5.0
    hf = rasterize(Cylinder(radius, (1.0, 0.0)), Pose2D(), grid)
    rng = np.random.default_rng(7)
    for _ in range(10):
        row, col = int(rng.integers(0, 240)), int(rng.integers(0, 320))
        _, y = pixel_xy(grid, row, col)
        expect = radius - math.sqrt(radius ** 2 - y * y) if abs(y) < radius else math.inf
        assert hf.gap[row, col] == pytest.approx(expect, rel=1e-12)
    # constant along the axis
    assert np.all(hf.gap == hf.gap[:, :1])


def test_pose_rotation_moves_cylinder_axis(grid):
    a = rasterize(Cylinder(5.0, (1.0, 0.0)), Pose2D(rotation=math.pi / 2), Grid(64, 64, 0.05))
    b = rasterize(Cylinder(5.0, (0.0, 1.0)), Pose2D(), Grid(64, 64, 0.05))
    np.testing.assert_allclose(a.gap, b.gap, atol=1e-12)


def test_pose_offset_shifts_contact():
    g = Grid(41, 41, 0.1)
    hf = rasterize(Sphere(1.0), Pose2D(offset_x=1.0, offset_y=-0.5), g)
    row, col = np.unravel_index(np.argmin(hf.gap), hf.gap.shape)
    assert (row, col) == (20 - 5, 20 + 10)


def test_annulus_and_gear_cover_expected_regions():
    g = Grid(201, 201, 0.1)
    hf = rasterize(Annulus(3.0, 6.0), Pose2D(), g)
    assert np.isinf(hf.gap[100, 100])
    assert hf.gap[100, 100 + 45] == 0.0
    gear = GearFace(5.0, 6.0, 12)
    hf = rasterize(gear, Pose2D(), g)
    assert hf.gap[100, 100] == 0.0
    theta = np.linspace(0, 2 * np.pi, 500)
    rim = gear.rim_radius(theta)
    assert rim.min() == pytest.approx(5.0) and rim.max() == pytest.approx(6.0)


@pytest.mark.parametrize("make", [
    lambda: Sphere(0.0), lambda: Sphere(-1.0), lambda: Sphere(float("nan")), lambda: Sphere(1e9),
    lambda: Annulus(3.0, 2.0), lambda: GearFace(5.0, 4.0, 10), lambda: GearFace(5.0, 6.0, 2),
    lambda: Cylinder(1.0, (0.0, 0.0)), lambda: FlatPlate(1.0, float("inf")),
    lambda: Pose2D(offset_x=float("nan")), lambda: Grid(0, 10, 0.1), lambda: PenetrationModel(0.0),
])
def test_invalid_inputs_rejected(make):
    with pytest.raises(GeometryError):
        make()


def test_shape_dict_round_trip():
    for shape in (Sphere(1.0), Cylinder(2.0, (0.0, 2.0)), Annulus(1, 2), GearFace(1, 2, 5), FlatPlate(3, 4)):
        assert shape_from_dict(shape_to_dict(shape)) == shape
    with pytest.raises(GeometryError):
        shape_from_dict({"type": "torus"})


def test_intersection_volume_flat_prism():
    g = Grid(100, 80, 0.05)
    hf = rasterize(FlatPlate(2.0, 1.5), Pose2D(), g)
    area = np.isfinite(hf.gap).sum() * g.pixel_pitch ** 2
    assert intersection_volume(hf, 0.3) == pytest.approx(0.3 * area, rel=1e-12)
    assert intersection_volume(hf, 0.0) == 0.0


def test_sphere_cap_volume(grid):
    hf = rasterize(Sphere(R_BALL), Pose2D(), grid)
    assert cap_volume(R_BALL, 0.5) == pytest.approx(1.4163, abs=5e-5)
    assert intersection_volume(hf, 0.5) == pytest.approx(cap_volume(R_BALL, 0.5), rel=0.01)


def test_no_contact_volume_is_zero(grid):
    hf = rasterize(Sphere(1.0), Pose2D(offset_x=100.0), grid)
    assert intersection_volume(hf, 2.0) == 0.0
    with pytest.raises(UnreachableVolumeError):
        solve_penetration_depth(hf, 1.0)


def test_solve_depth_flat_and_sphere(grid):
    g = Grid(100, 80, 0.05)
    hf = rasterize(FlatPlate(2.0, 1.5), Pose2D(), g)
    area = np.isfinite(hf.gap).sum() * g.pixel_pitch ** 2
    assert solve_penetration_depth(hf, 0.3 * area) == pytest.approx(0.3, abs=1e-6)
    hf = rasterize(Sphere(R_BALL), Pose2D(), grid)
    assert solve_penetration_depth(hf, 1.4163) == pytest.approx(0.5, abs=1e-4)
    assert solve_penetration_depth(hf, 0.0) == 0.0


def test_solve_depth_unreachable(grid):
    hf = rasterize(Sphere(R_BALL), Pose2D(), grid)
    with pytest.raises(UnreachableVolumeError):
        solve_penetration_depth(hf, 1e6)


def test_rasterize_is_deterministic(grid):
    a = rasterize(GearFace(4.0, 5.0, 13), Pose2D(0.3, -0.2, 0.4), grid)
    b = rasterize(GearFace(4.0, 5.0, 13), Pose2D(0.3, -0.2, 0.4), grid)
    assert a.gap.tobytes() == b.gap.tobytes()


shapes = st.one_of(
    st.builds(Sphere, st.floats(0.5, 4.0)),
    st.builds(Cylinder, st.floats(1.0, 8.0), st.sampled_from([(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)])),
    st.builds(FlatPlate, st.floats(0.5, 3.0), st.floats(0.5, 3.0)),
    st.builds(Annulus, st.just(0.5), st.floats(0.8, 2.0)),
)
small_grid = Grid(80, 60, 0.05)


@settings(max_examples=25, deadline=None)
@given(shapes, st.lists(st.floats(0.0, 2.0), min_size=2, max_size=6))
def test_volume_monotone_in_depth(shape, depths):
    hf = rasterize(shape, Pose2D(), small_grid)
    vols = [intersection_volume(hf, d) for d in sorted(depths)]
    assert all(b >= a for a, b in zip(vols, vols[1:]))


@settings(max_examples=25, deadline=None)
@given(shapes, st.floats(0.01, 2.0))
def test_solve_inverts_volume(shape, d):
    hf = rasterize(shape, Pose2D(), small_grid)
    v = intersection_volume(hf, d)
    d_hat = solve_penetration_depth(hf, v)
    assert abs(intersection_volume(hf, d_hat) - v) <= 1e-6 * v
    assert d_hat == pytest.approx(d, abs=1e-5)
