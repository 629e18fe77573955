"""Proportional person-following for a unicycle robot."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .fusion import IdentifiedPerson
from .geometry import Pose2D
from .world import RobotMode

V_MAX = 1.0
OMEGA_MAX = 1.5


def _clamp(x: float, lim: float) -> float:
    return max(-lim, min(lim, x))


@dataclass(frozen=True)
class ControlCommand:
    v: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v", _clamp(self.v, V_MAX))
        object.__setattr__(self, "omega", _clamp(self.omega, OMEGA_MAX))


STOP = ControlCommand(0.0, 0.0)


@dataclass(frozen=True)
class ControllerConfig:
    k_omega: float = 1.5
    k_v: float = 0.8
    follow_distance: float = 1.0
    lost_target_timeout: int = 30

    def __post_init__(self):
        if self.k_omega <= 0 or self.k_v <= 0:
            raise ValueError("gains must be positive")
        if self.follow_distance <= 0:
            raise ValueError("follow_distance must be positive")


def select_target(
    identified: Sequence[IdentifiedPerson],
    mode: RobotMode,
    target_name: str | None = None,
    cfg: ControllerConfig | None = None,
    last_target: IdentifiedPerson | None = None,
) -> IdentifiedPerson | None:
    if mode is RobotMode.STATIONARY:
        return None
    if mode is RobotMode.FOLLOW_CLOSEST:
        pool = list(identified)
    else:
        pool = [p for p in identified if p.name == target_name]
    if not pool:
        return None
    return min(pool, key=lambda p: (p.position.range, p.track_id))


def proportional_command(target: IdentifiedPerson, mode: RobotMode, cfg: ControllerConfig) -> ControlCommand:
    omega = cfg.k_omega * target.position.bearing
    if mode is RobotMode.YAW_TRACK:
        return ControlCommand(0.0, omega)
    v = max(0.0, cfg.k_v * (target.position.range - cfg.follow_distance))
    return ControlCommand(v, omega)


def integrate_robot(pose: Pose2D, cmd: ControlCommand | tuple[float, float], dt: float) -> Pose2D:
    """Unicycle step: turn first, then advance along the new heading.

    Pure kinematics; a raw ``(v, omega)`` pair is integrated unclamped.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v, omega = (cmd.v, cmd.omega) if isinstance(cmd, ControlCommand) else cmd
    heading = pose.heading + omega * dt
    return Pose2D(pose.x + v * dt * math.cos(heading), pose.y + v * dt * math.sin(heading), heading)


class FollowController:
    """Caller-side controller state: last command and how long the target has been missing.

    With no target the last command is ramped linearly to zero over
    ``lost_target_timeout`` frames, after which the robot stops.
    """

    def __init__(self, mode: RobotMode, target_name: str | None = None, cfg: ControllerConfig | None = None):
        self.mode = mode
        self.target_name = target_name
        self.cfg = cfg or ControllerConfig()
        self.last_cmd = STOP
        self.last_target: IdentifiedPerson | None = None
        self.frames_lost = 0

    def update(self, identified: Sequence[IdentifiedPerson]) -> ControlCommand:
        if self.mode is RobotMode.STATIONARY:
            return STOP
        target = select_target(identified, self.mode, self.target_name, self.cfg, self.last_target)
        if target is not None:
            self.last_target = target
            self.frames_lost = 0
            self.last_cmd = proportional_command(target, self.mode, self.cfg)
            return self.last_cmd
        self.frames_lost += 1
        remaining = max(0.0, 1.0 - self.frames_lost / self.cfg.lost_target_timeout)
        if remaining == 0.0:
            return STOP
        return ControlCommand(self.last_cmd.v * remaining, self.last_cmd.omega * remaining)
