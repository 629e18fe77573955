"""Planar geometry shared by the tracker, sensors, fusion and controller.

Conventions: world frame is x/y in metres with headings counter-clockwise
from +x.  The robot frame has x forward, y to the left and z up.  All angles
are stored normalised to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalise an angle to (-pi, pi]."""
    w = math.remainder(a, TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


def angular_distance(a: float, b: float) -> float:
    d = abs(wrap_angle(a) - wrap_angle(b))
    return min(d, TWO_PI - d)


def shortest_arc(a: float, b: float) -> float:
    """Signed rotation taking ``a`` to ``b`` along the shorter way round."""
    return wrap_angle(b - a)


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class RobotFramePoint:
    x: float
    y: float
    z: float = 0.0

    @property
    def range(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def bearing(self) -> float:
        return math.atan2(self.y, self.x)


@dataclass(frozen=True)
class CameraIntrinsics:
    f_x: float
    c_x: float
    image_width: int

    def __post_init__(self):
        if self.f_x <= 0:
            raise ValueError(f"f_x must be positive, got {self.f_x}")
        if not 0 < self.c_x < self.image_width:
            raise ValueError(f"c_x={self.c_x} outside image of width {self.image_width}")

    @property
    def hfov(self) -> float:
        return 2.0 * math.atan((self.image_width / 2.0) / self.f_x)

    @classmethod
    def from_hfov(cls, hfov: float, image_width: int = 640) -> "CameraIntrinsics":
        f_x = (image_width / 2.0) / math.tan(hfov / 2.0)
        return cls(f_x=f_x, c_x=image_width / 2.0, image_width=image_width)


def default_camera() -> CameraIntrinsics:
    # RealSense D435-class colour stream: 69 deg horizontal FOV, 640 px wide
    return CameraIntrinsics.from_hfov(math.radians(69.0), 640)


def world_to_robot_frame(px: float, py: float, robot: Pose2D, z: float = 0.0) -> RobotFramePoint:
    dx = px - robot.x
    dy = py - robot.y
    c = math.cos(robot.heading)
    s = math.sin(robot.heading)
    return RobotFramePoint(c * dx + s * dy, -s * dx + c * dy, z)


def robot_to_world_frame(p: RobotFramePoint, robot: Pose2D) -> tuple[float, float]:
    c = math.cos(robot.heading)
    s = math.sin(robot.heading)
    return robot.x + c * p.x - s * p.y, robot.y + s * p.x + c * p.y


class PointBehindCameraError(ValueError):
    pass


def project_to_pixel(p: RobotFramePoint, cam: CameraIntrinsics) -> float:
    """Pixel column of a robot-frame point.

    Left of the robot (positive y) lands left of the principal point, so that
    ``bearing_of_pixel(project_to_pixel(p)) == atan2(p.y, p.x)``.
    """
    if p.x <= 0:
        raise PointBehindCameraError(f"point at x={p.x} is not in front of the camera")
    return cam.c_x - cam.f_x * (p.y / p.x)


def bearing_of_pixel(u: float, cam: CameraIntrinsics) -> float:
    return math.atan2(cam.c_x - u, cam.f_x)


def in_image(u: float, cam: CameraIntrinsics) -> bool:
    return 0.0 <= u < cam.image_width
