import math

import numpy as np
import pytest

from swarmdeck.world import (
    FieldConfig,
    OutOfFieldError,
    Pose,
    RegionGrid,
    Twist,
    body_to_world,
    from_normalized,
    normalize_angle,
    to_normalized,
    world_to_body,
)


def test_normalize_angle_identity_and_wrap():
    assert normalize_angle(0.0) == 0.0
    assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
    # interval is half-open at -pi
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)


def test_normalize_angle_congruent_and_idempotent():
    rng = np.random.default_rng(7)
    for theta in rng.uniform(-50, 50, size=200):
        w = normalize_angle(theta)
        assert -math.pi < w <= math.pi
        assert math.remainder(w - theta, math.tau) == pytest.approx(0.0, abs=1e-9)
        assert normalize_angle(w) == pytest.approx(w, abs=1e-15)


def test_normalize_angle_rejects_nonfinite():
    with pytest.raises(ValueError):
        normalize_angle(float("nan"))
    with pytest.raises(ValueError):
        normalize_angle(float("inf"))


def test_pose_normalizes_theta():
    p = Pose(0.1, 0.2, 3 * math.pi)
    assert p.theta == pytest.approx(math.pi)


def test_default_field_dimensions():
    f = FieldConfig()
    assert f.width == pytest.approx(2.42)
    assert f.height == pytest.approx(1.36)


def test_to_normalized_corners_and_center():
    f = FieldConfig()
    assert to_normalized(0.0, 0.0, f) == (0.0, 0.0)
    assert to_normalized(2.42, 1.36, f) == pytest.approx((1.0, 1.0))
    assert to_normalized(1.21, 0.68, f) == pytest.approx((0.5, 0.5))
    with pytest.raises(OutOfFieldError):
        to_normalized(-0.01, 0.5, f)


def test_normalized_round_trip_tight():
    f = FieldConfig()
    rng = np.random.default_rng(3)
    for _ in range(500):
        x = float(rng.uniform(0, f.width))
        y = float(rng.uniform(0, f.height))
        u, v = to_normalized(x, y, f)
        x2, y2 = from_normalized(u, v, f)
        assert abs(x2 - x) <= 1e-12 and abs(y2 - y) <= 1e-12


def test_region_grid_default_is_40():
    g = RegionGrid()
    assert (g.rows, g.cols, g.count) == (5, 8, 40)


def test_region_of_corners_and_row_major():
    g = RegionGrid()
    cx, cy = g.region_center(1)
    assert g.region_of(cx, cy) == 1
    # row 4, col 2 (1-based) in an 8-column grid -> (4-1)*8 + 2 = 26
    cx, cy = g.region_center(26)
    assert g.region_of(cx, cy) == 26
    row, col = divmod(26 - 1, 8)
    assert (row, col) == (3, 1)
    # a point just inside the bottom-right corner
    assert g.region_of(g.width - 1e-9, g.height - 1e-9) == 40


def test_region_center_round_trip_all():
    g = RegionGrid()
    for k in range(1, 41):
        assert g.region_of(*g.region_center(k)) == k


def test_region_of_rejects_outside():
    g = RegionGrid()
    with pytest.raises(OutOfFieldError):
        g.region_of(g.width + 0.01, 0.1)


def test_twist_frame_rotations_invert():
    t = Twist(0.1, -0.05, 0.3)
    for heading in (-2.0, 0.0, 0.7, math.pi):
        back = world_to_body(body_to_world(t, heading), heading)
        assert back.vx == pytest.approx(t.vx)
        assert back.vy == pytest.approx(t.vy)
        assert back.omega == t.omega


def test_field_clamp_inside():
    f = FieldConfig()
    x, y = f.clamp_inside(-1.0, 5.0)
    assert (x, y) == (f.boundary_margin, f.height - f.boundary_margin)
