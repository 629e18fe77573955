"""Canonical scripts for the five person-following experiments.

Exp1: everyone stationary facing the robot.  Exp2-4: three people walk
looping routes around the robot, leave the room, re-enter, cut across and
pass through each other.  Exp5: the robot follows Alice while Bob and Carol
repeatedly step in between the two.
"""

from __future__ import annotations

import math

from .geometry import Pose2D, angular_distance
from .world import PersonAgent, RobotMode, ScenarioScript

DURATION = 120.0
NAMES = ("Alice", "Bob", "Carol")
TURN_TIME = 0.4

SCENARIO_IDS = ("Exp1", "Exp2", "Exp3", "Exp4", "Exp5")


class _Walker:
    """Keyframe builder: walk straight segments, turn in place, wait."""

    def __init__(self, x: float, y: float, heading: float):
        self.kf: list[tuple[float, Pose2D]] = [(0.0, Pose2D(x, y, heading))]

    @property
    def t(self) -> float:
        return self.kf[-1][0]

    @property
    def pose(self) -> Pose2D:
        return self.kf[-1][1]

    def _add(self, t: float, x: float, y: float, h: float):
        if t <= self.t + 1e-9:
            raise ValueError(f"keyframe at {t} not after {self.t}")
        self.kf.append((t, Pose2D(x, y, h)))
        return self

    def turn(self, heading: float, dur: float = TURN_TIME):
        p = self.pose
        if angular_distance(p.heading, heading) < 1e-9:
            return self
        return self._add(self.t + dur, p.x, p.y, heading)

    def face(self, x: float, y: float, dur: float = TURN_TIME):
        p = self.pose
        return self.turn(math.atan2(y - p.y, x - p.x), dur)

    def wait(self, dur: float):
        p = self.pose
        return self._add(self.t + dur, p.x, p.y, p.heading)

    def wait_until(self, t: float):
        if t > self.t + 1e-9:
            self.wait(t - self.t)
        return self

    def go(self, x: float, y: float, speed: float = 1.0, arrive: float | None = None):
        p = self.pose
        h = math.atan2(y - p.y, x - p.x)
        dist = math.hypot(x - p.x, y - p.y)
        if dist < 1e-9:
            return self if arrive is None else self.wait_until(arrive)
        if arrive is not None:
            budget = arrive - self.t
            turn = min(TURN_TIME, 0.2 * budget)
            self.turn(h, turn)
            return self._add(arrive, x, y, h)
        self.turn(h)
        return self._add(self.t + dist / speed, x, y, h)

    def path(self, pts, speed: float = 1.0):
        for x, y in pts:
            self.go(x, y, speed)
        return self

    def hold_to(self, duration: float):
        return self.wait_until(duration)

    def agent(self, name: str, duration: float = DURATION) -> PersonAgent:
        self.hold_to(duration)
        return PersonAgent(name, list(self.kf))


def _exp1_persons() -> list[PersonAgent]:
    spots = {"Alice": (2.0, 0.0), "Bob": (2.2, 1.0), "Carol": (2.5, -1.1)}
    out = []
    for name in NAMES:
        x, y = spots[name]
        out.append(_Walker(x, y, math.atan2(-y, -x)).agent(name))
    return out


def _loop_persons(phase: float = 0.0) -> list[PersonAgent]:
    """Routes around a robot parked at the origin facing +x.

    Alice circles counter-clockwise and comes back to check in facing the
    robot; Bob runs the same circuit clockwise so the two meet head on twice
    a lap; Carol goes in and out through the door at the far corner, beyond
    tracker range.
    """
    ring = [(3.2, 2.0), (0.5, 3.4), (-2.8, 2.2), (-3.2, -1.4), (0.3, -3.3), (3.0, -1.6)]

    alice = _Walker(2.0, 0.0, math.pi).wait(3.0 + phase)
    while alice.t < DURATION:
        alice.path(ring, speed=1.0).go(2.0, 0.0, speed=0.8).face(0.0, 0.0).wait(2.5)

    bob = _Walker(2.2, 1.0, math.atan2(-1.0, -2.2)).wait(4.0)
    while bob.t < DURATION:
        bob.go(3.0, -1.6, 0.9).path(ring[::-1][1:], speed=1.1)
        bob.go(2.3, 0.9, 0.8).face(0.0, 0.0).wait(2.0)

    carol = _Walker(2.5, -1.1, math.atan2(1.1, -2.5)).wait(5.0)
    while carol.t < DURATION:
        carol.path([(1.2, -2.0), (-1.5, -3.6), (-4.0, -4.0), (-7.0, -5.0)], speed=1.0)
        carol.wait(4.0)
        carol.path([(-4.0, -4.0), (-2.0, 0.3), (1.0, 0.8)], speed=1.0)
        carol.go(2.4, -0.6, 0.8).face(0.0, 0.0).wait(2.0)
        carol.path([(0.8, 1.5), (-1.0, 2.8)], speed=1.2).go(1.5, -1.2, 1.2).face(0.0, 0.0).wait(1.5)
    return [alice.agent("Alice"), bob.agent("Bob"), carol.agent("Carol")]


def _exp5_persons() -> list[PersonAgent]:
    """Alice leads the robot round the room, stopping to look back.

    Bob and Carol each step into the gap between the robot and Alice and
    walk in it for a few seconds, long enough for the tracker to lose her.
    """
    speed = 0.7
    alice = _Walker(1.5, 0.0, math.pi).wait(4.0)
    route = [(3.0, 0.0), (3.0, 3.0), (-3.0, 3.0), (-3.0, -3.0), (3.0, -3.0), (3.0, 0.0)]

    looks = []

    def look_back(dur=3.0):
        h = alice.pose.heading
        looks.append(alice.t)
        alice.turn(h + math.pi, 0.6).wait(dur).turn(h, 0.6)

    # lap 1
    alice.go(*route[0], speed).go(*route[1], speed)
    alice.go(0.0, 3.0, speed)
    look_back()
    alice.go(*route[2], speed).go(-3.0, 0.0, speed)
    look_back()
    alice.go(*route[3], speed).go(0.0, -3.0, speed)
    look_back()
    alice.go(*route[4], speed).go(*route[5], speed)
    # lap 2
    alice.go(*route[1], speed).go(0.0, 3.0, speed)
    look_back()
    alice.go(*route[2], speed).go(-3.0, 0.0, speed)
    look_back()
    alice.go(*route[3], speed).go(0.0, -3.0, speed)
    look_back()
    alice.go(3.2, -3.2, speed)
    alice.turn(alice.pose.heading + math.pi, 0.6)
    return _exp5_companions(alice.agent("Alice"), looks)


def _exp5_companions(alice: PersonAgent, looks: list[float]) -> list[PersonAgent]:
    # each cut-in ends as Alice turns round to look back
    events = [(looks[0], "Bob"), (looks[2], "Carol"), (looks[3], "Bob"), (looks[5], "Carol")]

    walkers = {
        "Bob": _Walker(2.0, 1.2, math.atan2(-1.2, -2.0)).wait(5.0),
        "Carol": _Walker(2.0, -1.2, math.atan2(1.2, -2.0)).wait(6.0),
    }
    idle = {"Bob": (0.0, 0.5), "Carol": (0.0, -0.8)}
    walkers["Bob"].go(*idle["Bob"], 0.9)
    walkers["Carol"].go(*idle["Carol"], 0.9)

    lag = 1.0  # seconds behind Alice, ~0.7 m
    walk_in = 3.5
    for t_look, who in events:
        w = walkers[who]
        t_join = t_look - walk_in
        join = alice.pose_at(t_join - lag)
        leave = alice.pose_at(t_look - lag)
        h = join.heading
        side = 1.0 if who == "Bob" else -1.0
        nx, ny = -math.sin(h) * side, math.cos(h) * side
        approach = (join.x + 2.0 * nx, join.y + 2.0 * ny)
        w.go(*approach, 1.1).wait_until(t_join - 2.0)
        w.go(join.x, join.y, arrive=t_join)
        w.go(leave.x, leave.y, arrive=t_look)
        w.go(leave.x - 2.0 * nx, leave.y - 2.0 * ny, 1.3)
        w.go(*idle[who], 1.0)
    return [alice, walkers["Bob"].agent("Bob"), walkers["Carol"].agent("Carol")]


def build_scenario(scenario_id: str) -> ScenarioScript:
    sid = scenario_id.capitalize()
    origin = Pose2D(0.0, 0.0, 0.0)
    if sid == "Exp1":
        return ScenarioScript("Exp1", DURATION, _exp1_persons(), origin, RobotMode.STATIONARY)
    if sid == "Exp2":
        return ScenarioScript("Exp2", DURATION, _loop_persons(), origin, RobotMode.STATIONARY)
    if sid == "Exp3":
        return ScenarioScript("Exp3", DURATION, _loop_persons(), origin, RobotMode.YAW_TRACK, "Alice")
    if sid == "Exp4":
        return ScenarioScript("Exp4", DURATION, _loop_persons(1.5), origin, RobotMode.FOLLOW_CLOSEST)
    if sid == "Exp5":
        return ScenarioScript("Exp5", DURATION, _exp5_persons(), origin, RobotMode.FOLLOW_TARGET, "Alice")
    raise KeyError(f"unknown scenario {scenario_id!r}; expected one of {', '.join(SCENARIO_IDS)}")
