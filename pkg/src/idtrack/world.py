"""Ground-truth world and synthetic sensors.

The tracker stand-in reproduces the behaviour of a laser/depth person
tracker: 360 degree coverage, frame-to-frame nearest-neighbour linking,
constant-velocity coasting through short occlusions and occasional identity
swaps when two people pass close to each other.  The face sensor stands in
for a camera face recogniser: it only fires for people in the camera field
of view, close enough, facing the robot and not hidden behind someone else.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .fusion import UNKNOWN, FaceObservation, TrackDetection
from .geometry import (
    CameraIntrinsics,
    Pose2D,
    RobotFramePoint,
    angular_distance,
    project_to_pixel,
    robot_to_world_frame,
    shortest_arc,
    world_to_robot_frame,
)

FRAME_RATE = 10.0
DT = 1.0 / FRAME_RATE
HEAD_HEIGHT = 1.7
TRACK_HEIGHT = 1.0
CAMERA_HEIGHT = 1.2
TRACK_LINK_GATE = 0.8
VELOCITY_WINDOW = 5


class RobotMode(str, Enum):
    STATIONARY = "Stationary"
    YAW_TRACK = "YawTrack"
    FOLLOW_CLOSEST = "FollowClosest"
    FOLLOW_TARGET = "FollowTarget"

    @property
    def needs_target(self) -> bool:
        return self in (RobotMode.YAW_TRACK, RobotMode.FOLLOW_TARGET)


@dataclass
class PersonAgent:
    name: str
    waypoints: list[tuple[float, Pose2D]]
    body_radius: float = 0.25

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError(f"{self.name} has no keyframes")
        times = [t for t, _ in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"{self.name}: keyframe times must be strictly increasing")
        self._times = times

    def _segment(self, t: float) -> int:
        # index k such that times[k] <= t < times[k+1]
        return bisect.bisect_right(self._times, t) - 1

    def pose_at(self, t: float) -> Pose2D:
        k = self._segment(t)
        if k < 0:
            return self.waypoints[0][1]
        if k >= len(self.waypoints) - 1:
            return self.waypoints[-1][1]
        t0, p0 = self.waypoints[k]
        t1, p1 = self.waypoints[k + 1]
        a = (t - t0) / (t1 - t0)
        return Pose2D(
            p0.x + a * (p1.x - p0.x),
            p0.y + a * (p1.y - p0.y),
            p0.heading + a * shortest_arc(p0.heading, p1.heading),
        )

    def velocity_at(self, t: float) -> tuple[float, float]:
        k = self._segment(t)
        if k < 0 or k >= len(self.waypoints) - 1:
            return 0.0, 0.0
        t0, p0 = self.waypoints[k]
        t1, p1 = self.waypoints[k + 1]
        return (p1.x - p0.x) / (t1 - t0), (p1.y - p0.y) / (t1 - t0)


@dataclass(frozen=True)
class PersonState:
    name: str
    pose: Pose2D
    vx: float = 0.0
    vy: float = 0.0
    body_radius: float = 0.25


@dataclass(frozen=True)
class WorldState:
    t: float
    robot: Pose2D
    persons: tuple[PersonState, ...]

    def person(self, name: str) -> PersonState:
        for p in self.persons:
            if p.name == name:
                return p
        raise KeyError(name)

    def relative(self, p: PersonState, z: float = TRACK_HEIGHT) -> RobotFramePoint:
        return world_to_robot_frame(p.pose.x, p.pose.y, self.robot, z)


@dataclass
class ScenarioScript:
    id: str
    duration: float
    persons: list[PersonAgent]
    robot_start: Pose2D
    robot_mode: RobotMode
    target_name: str | None = None

    def __post_init__(self):
        if self.robot_mode.needs_target != (self.target_name is not None):
            raise ValueError(f"{self.robot_mode.value} and target_name={self.target_name!r} disagree")

    @property
    def n_frames(self) -> int:
        return int(round(self.duration * FRAME_RATE))


class TimeOutOfRangeError(ValueError):
    pass


def step_world(script: ScenarioScript, t: float, robot: Pose2D | None = None) -> WorldState:
    """Ground truth at time ``t``; ``robot`` is the integrated robot pose."""
    if not 0.0 <= t <= script.duration + 1e-9:
        raise TimeOutOfRangeError(f"t={t} outside [0, {script.duration}]")
    persons = tuple(
        PersonState(a.name, a.pose_at(t), *a.velocity_at(t), body_radius=a.body_radius)
        for a in script.persons
    )
    return WorldState(t, robot if robot is not None else script.robot_start, persons)


@dataclass
class SensorNoiseConfig:
    pos_sigma: float = 0.05
    pixel_sigma: float = 5.0
    detect_prob: float = 0.95
    face_recog_prob: float = 0.8
    face_range_max: float = 4.0
    face_facing_max: float = math.radians(45.0)
    tracker_range_max: float = 8.0
    miss_max: int = 10
    swap_distance: float = 0.5
    swap_prob: float = 0.1
    # recogniser errors, off by default
    unknown_prob: float = 0.0
    misid_prob: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for k in ("detect_prob", "face_recog_prob", "swap_prob", "unknown_prob", "misid_prob"):
            v = getattr(self, k)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{k}={v} is not a probability")
        for k in ("face_range_max", "face_facing_max", "tracker_range_max", "swap_distance"):
            if getattr(self, k) <= 0:
                raise ValueError(f"{k} must be positive")
        if self.pos_sigma < 0 or self.pixel_sigma < 0 or self.miss_max < 0:
            raise ValueError("sigmas and miss_max must be non-negative")

    @classmethod
    def noise_free(cls, **kw) -> "SensorNoiseConfig":
        base = dict(pos_sigma=0.0, pixel_sigma=0.0, detect_prob=1.0, face_recog_prob=1.0, swap_prob=0.0)
        base.update(kw)
        return cls(**base)


# --- visibility -----------------------------------------------------------


def _polar(world: WorldState) -> list[tuple[float, float]]:
    out = []
    for p in world.persons:
        r = world.relative(p)
        out.append((r.range, r.bearing))
    return out


def occluded(world: WorldState, idx: int, polar: Sequence[tuple[float, float]] | None = None) -> bool:
    """True if a strictly closer person covers person ``idx``'s bearing."""
    polar = polar if polar is not None else _polar(world)
    rng_a, brg_a = polar[idx]
    for j, (rng_b, brg_b) in enumerate(polar):
        if j == idx or not rng_b < rng_a or rng_b <= 0.0:
            continue
        half_width = math.asin(min(1.0, world.persons[j].body_radius / rng_b))
        if angular_distance(brg_a, brg_b) < half_width:
            return True
    return False


def visible_to_tracker(world: WorldState, idx: int, noise: SensorNoiseConfig, polar=None) -> bool:
    polar = polar if polar is not None else _polar(world)
    return polar[idx][0] <= noise.tracker_range_max and not occluded(world, idx, polar)


def face_visible(world: WorldState, idx: int, cam: CameraIntrinsics, noise: SensorNoiseConfig, polar=None) -> bool:
    """The four deterministic face predicates: FOV, range, facing, occlusion."""
    polar = polar if polar is not None else _polar(world)
    p = world.persons[idx]
    rel = world.relative(p, HEAD_HEIGHT)
    if rel.x <= 0 or not 0.0 <= project_to_pixel(rel, cam) < cam.image_width:
        return False
    if polar[idx][0] > noise.face_range_max:
        return False
    to_robot = math.atan2(world.robot.y - p.pose.y, world.robot.x - p.pose.x)
    if angular_distance(p.pose.heading, to_robot) > noise.face_facing_max:
        return False
    return not occluded(world, idx, polar)


# --- synthetic anonymous tracker -------------------------------------------


@dataclass
class _Track:
    track_id: int
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    frames_since_seen: int = 0
    history: deque = field(default_factory=lambda: deque(maxlen=VELOCITY_WINDOW))

    def link(self, t: float, x: float, y: float):
        self.history.append((t, x, y))
        self.x, self.y = x, y
        self.frames_since_seen = 0
        n = len(self.history)
        if n < 2:
            self.vx = self.vy = 0.0
            return
        tm = sum(h[0] for h in self.history) / n
        xm = sum(h[1] for h in self.history) / n
        ym = sum(h[2] for h in self.history) / n
        den = sum((h[0] - tm) ** 2 for h in self.history)
        self.vx = sum((h[0] - tm) * (h[1] - xm) for h in self.history) / den
        self.vy = sum((h[0] - tm) * (h[2] - ym) for h in self.history) / den


@dataclass
class SyntheticTrackerState:
    """Live tracks in world coordinates (the tracker is assumed to know odometry)."""

    tracks: dict[int, _Track] = field(default_factory=dict)
    next_track_id: int = 1
    # person index -> track id linked in the latest frame, for instrumentation
    last_links: dict[int, int] = field(default_factory=dict)


def _greedy_link(preds: list[tuple[int, float, float]], dets: list[tuple[int, float, float]], gate: float):
    pairs = []
    for tid, px, py in preds:
        for di, dx, dy in dets:
            d = math.hypot(px - dx, py - dy)
            if d <= gate:
                pairs.append((d, tid, di))
    pairs.sort()
    links: dict[int, int] = {}
    used: set[int] = set()
    for _, tid, di in pairs:
        if tid in links or di in used:
            continue
        links[tid] = di
        used.add(di)
    return links


def synth_tracker_step(
    state: SyntheticTrackerState,
    world: WorldState,
    noise: SensorNoiseConfig,
    rng: np.random.Generator,
) -> tuple[list[TrackDetection], SyntheticTrackerState]:
    """Advance the tracker one frame.  ``state`` is updated in place and returned."""
    polar = _polar(world)
    dets: list[tuple[int, float, float]] = []
    for i, p in enumerate(world.persons):
        if not visible_to_tracker(world, i, noise, polar):
            continue
        if rng.random() >= noise.detect_prob:
            continue
        rel = world.relative(p)
        ex, ey = rng.normal(0.0, noise.pos_sigma, size=2) if noise.pos_sigma > 0 else (0.0, 0.0)
        wx, wy = robot_to_world_frame(RobotFramePoint(rel.x + ex, rel.y + ey, rel.z), world.robot)
        dets.append((i, wx, wy))

    for tr in state.tracks.values():
        tr.x += tr.vx * DT
        tr.y += tr.vy * DT
    preds = [(tid, tr.x, tr.y) for tid, tr in state.tracks.items()]
    links = _greedy_link(preds, [(di, x, y) for di, (_, x, y) in enumerate(dets)], TRACK_LINK_GATE)

    # close passes may exchange the linkage of two people
    by_person = {dets[di][0]: tid for tid, di in links.items()}
    det_of_person = {person: di for di, (person, _, _) in enumerate(dets)}
    n = len(world.persons)
    for a in range(n):
        for b in range(a + 1, n):
            if a not in by_person or b not in by_person:
                continue
            pa, pb = world.persons[a].pose, world.persons[b].pose
            if math.hypot(pa.x - pb.x, pa.y - pb.y) > noise.swap_distance:
                continue
            if rng.random() < noise.swap_prob:
                ta, tb = by_person[a], by_person[b]
                links[ta], links[tb] = det_of_person[b], det_of_person[a]
                by_person[a], by_person[b] = tb, ta

    linked_dets = set(links.values())
    for tid in list(state.tracks):
        tr = state.tracks[tid]
        if tid in links:
            _, x, y = dets[links[tid]]
            tr.link(world.t, x, y)
        else:
            tr.frames_since_seen += 1
            if tr.frames_since_seen > noise.miss_max:
                del state.tracks[tid]
    for di, (person, x, y) in enumerate(dets):
        if di in linked_dets:
            continue
        tr = _Track(state.next_track_id, x, y)
        tr.link(world.t, x, y)
        state.tracks[tr.track_id] = tr
        links[tr.track_id] = di
        state.next_track_id += 1
    state.last_links = {dets[di][0]: tid for tid, di in links.items() if tid in state.tracks}

    out = []
    for tid, tr in state.tracks.items():
        rel = world_to_robot_frame(tr.x, tr.y, world.robot, TRACK_HEIGHT)
        out.append(TrackDetection(tid, rel, world.t))
    return out, state


# --- synthetic face recogniser --------------------------------------------


def face_candidates(world: WorldState, cam: CameraIntrinsics, noise: SensorNoiseConfig) -> list[int]:
    polar = _polar(world)
    return [i for i in range(len(world.persons)) if face_visible(world, i, cam, noise, polar)]


def synth_face_step(
    world: WorldState,
    cam: CameraIntrinsics,
    noise: SensorNoiseConfig,
    rng: np.random.Generator,
) -> list[FaceObservation]:
    out = []
    names = [p.name for p in world.persons]
    for i in face_candidates(world, cam, noise):
        if rng.random() >= noise.face_recog_prob:
            continue
        p = world.persons[i]
        head = world.relative(p, HEAD_HEIGHT)
        u = project_to_pixel(head, cam)
        if noise.pixel_sigma > 0:
            u += rng.normal(0.0, noise.pixel_sigma)
        v = cam.image_width * 0.375 - cam.f_x * (HEAD_HEIGHT - CAMERA_HEIGHT) / head.x
        name, score = p.name, 1.0
        if noise.unknown_prob > 0 and rng.random() < noise.unknown_prob:
            name, score = UNKNOWN, 0.3
        elif noise.misid_prob > 0 and len(names) > 1 and rng.random() < noise.misid_prob:
            others = [n for n in names if n != p.name]
            name, score = others[int(rng.integers(len(others)))], 0.9
        out.append(FaceObservation(name, u, v, score, world.t))
    return out
