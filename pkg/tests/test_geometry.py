import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idtrack.fusion import FaceObservation, TrackDetection, heading_of_face, heading_of_track
from idtrack.geometry import (
    CameraIntrinsics,
    PointBehindCameraError,
    Pose2D,
    RobotFramePoint,
    angular_distance,
    project_to_pixel,
    robot_to_world_frame,
    world_to_robot_frame,
    wrap_angle,
)

angles = st.floats(-20.0, 20.0, allow_nan=False)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (0.0, 0.0, 0.0),
        (math.radians(179), math.radians(-179), math.radians(2)),
        (math.pi / 2, -math.pi / 2, math.pi),
    ],
)
def test_angular_distance_examples(a, b, expected):
    assert angular_distance(a, b) == pytest.approx(expected, abs=1e-12)


@given(angles)
def test_wrap_angle_range(a):
    w = wrap_angle(a)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
    assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


def test_wrap_angle_boundary():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)


@given(angles, angles)
def test_angular_distance_symmetric_and_bounded(a, b):
    d = angular_distance(a, b)
    assert d == angular_distance(b, a)
    assert 0.0 <= d <= math.pi


@given(angles, angles, angles)
def test_angular_distance_triangle(a, b, c):
    assert angular_distance(a, c) <= angular_distance(a, b) + angular_distance(b, c) + 1e-12


def test_pose_heading_normalised():
    assert Pose2D(0, 0, 3 * math.pi / 2).heading == pytest.approx(-math.pi / 2)


@pytest.mark.parametrize(
    "p, robot, expected",
    [
        ((1, 0), Pose2D(0, 0, 0), (1, 0)),
        ((0, 1), Pose2D(0, 0, math.pi / 2), (1, 0)),
        ((2, 2), Pose2D(1, 1, 0), (1, 1)),
    ],
)
def test_world_to_robot_frame_examples(p, robot, expected):
    r = world_to_robot_frame(*p, robot, z=0.7)
    assert (r.x, r.y) == pytest.approx(expected, abs=1e-12)
    assert r.z == 0.7


coords = st.floats(-50, 50, allow_nan=False)


@given(coords, coords, coords, coords, angles)
def test_world_robot_round_trip(px, py, rx, ry, h):
    robot = Pose2D(rx, ry, h)
    rel = world_to_robot_frame(px, py, robot)
    wx, wy = robot_to_world_frame(rel, robot)
    assert wx == pytest.approx(px, abs=1e-9)
    assert wy == pytest.approx(py, abs=1e-9)


CAM600 = CameraIntrinsics(f_x=600.0, c_x=320.0, image_width=640)


@pytest.mark.parametrize(
    "p, u",
    [
        (RobotFramePoint(1, 0, 0), 320.0),
        (RobotFramePoint(1, -1, 0), 920.0),
        (RobotFramePoint(2, 0.5, 0), 170.0),
    ],
)
def test_project_to_pixel_examples(p, u):
    assert project_to_pixel(p, CAM600) == pytest.approx(u)


def test_project_outside_image_is_not_visible():
    u = project_to_pixel(RobotFramePoint(1, -1, 0), CAM600)
    assert not 0 <= u < CAM600.image_width


def test_project_behind_camera():
    with pytest.raises(PointBehindCameraError):
        project_to_pixel(RobotFramePoint(0.0, 1.0, 0.0), CAM600)


def test_camera_invariants():
    with pytest.raises(ValueError):
        CameraIntrinsics(f_x=0.0, c_x=320, image_width=640)
    with pytest.raises(ValueError):
        CameraIntrinsics(f_x=600, c_x=640, image_width=640)
    assert CAM600.hfov == pytest.approx(2 * math.atan(320 / 600))


def test_default_camera_hfov(cam):
    assert math.degrees(cam.hfov) == pytest.approx(69.0)


@settings(max_examples=300)
@given(st.floats(0.2, 30.0), st.floats(-0.999, 0.999))
def test_face_heading_inverts_projection(x, frac):
    half = CAM600.hfov / 2
    y = x * math.tan(frac * half)
    p = RobotFramePoint(x, y, 1.7)
    face = FaceObservation("A", project_to_pixel(p, CAM600))
    assert abs(heading_of_face(face, CAM600) - heading_of_track(TrackDetection(1, p))) < 1e-9
