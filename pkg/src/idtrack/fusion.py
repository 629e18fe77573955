"""Identity fusion of anonymous person tracks with face recognition.

Tracks (robot-frame positions) and faces (pixel columns) are both reduced to
a heading relative to the robot.  Faces are then assigned to tracks by
sequential nearest neighbour under an angular gate, and each track keeps the
last name it was confirmed with so that it stays identified while the face
is out of view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .geometry import (
    CameraIntrinsics,
    RobotFramePoint,
    angular_distance,
    bearing_of_pixel,
    default_camera,
)

UNKNOWN = "Unknown"


class Source(str, Enum):
    FACE_MATCHED = "FaceMatched"
    MEMORY_CARRIED = "MemoryCarried"
    UNIDENTIFIED = "Unidentified"


@dataclass(frozen=True)
class TrackDetection:
    track_id: int
    position: RobotFramePoint
    timestamp: float = 0.0


@dataclass(frozen=True)
class FaceObservation:
    name: str
    u: float
    v: float = 240.0
    score: float = 1.0
    timestamp: float = 0.0


@dataclass(frozen=True)
class IdentifiedPerson:
    name: str
    position: RobotFramePoint
    track_id: int
    source: Source


@dataclass(frozen=True)
class FusionConfig:
    theta_thres: float = math.radians(15.0)
    camera: CameraIntrinsics = field(default_factory=default_camera)
    # frames a vanished track's identity is remembered (5 s at 10 Hz)
    memory_ttl: int = 50

    def __post_init__(self):
        if not 0 < self.theta_thres <= math.pi:
            raise ValueError(f"theta_thres must lie in (0, pi], got {self.theta_thres}")
        if self.memory_ttl < 0:
            raise ValueError("memory_ttl must be non-negative")


@dataclass(frozen=True)
class MemoryEntry:
    name: str
    confirmed_at: float
    frames_absent: int = 0


class DuplicateTrackError(ValueError):
    pass


class DegenerateHeadingError(ValueError):
    pass


class IdentityMemory:
    """Map from track id to the last face-confirmed name.

    Treated as a value: :func:`snnts_step` never mutates its input memory.
    """

    def __init__(self, entries: dict[int, MemoryEntry] | None = None):
        self._entries: dict[int, MemoryEntry] = dict(entries or {})

    def get(self, track_id: int) -> MemoryEntry | None:
        return self._entries.get(track_id)

    def name_of(self, track_id: int) -> str | None:
        e = self._entries.get(track_id)
        return None if e is None else e.name

    def __contains__(self, track_id: int) -> bool:
        return track_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, IdentityMemory) and self._entries == other._entries

    def items(self):
        return self._entries.items()

    def __repr__(self) -> str:
        return f"IdentityMemory({self._entries!r})"


def heading_of_track(d: TrackDetection) -> float:
    x, y = d.position.x, d.position.y
    if x == 0.0 and y == 0.0:
        raise DegenerateHeadingError(f"track {d.track_id} sits at the robot origin")
    return math.atan2(y, x)


def heading_of_face(f: FaceObservation, cam: CameraIntrinsics) -> float:
    return bearing_of_pixel(f.u, cam)


def associate(
    track_bearings: Sequence[tuple[int, float]],
    face_bearings: Sequence[tuple[int, float]],
    theta_thres: float,
) -> dict[int, int]:
    """One-to-one track->face matching by sequential nearest neighbour.

    All pairs inside the angular gate are ranked by angular distance (ties by
    track id, then face index) and committed smallest first, skipping pairs
    whose track or face is already taken.
    """
    pairs = []
    for tid, tb in track_bearings:
        for fi, fb in face_bearings:
            d = angular_distance(tb, fb)
            if d <= theta_thres:
                pairs.append((d, tid, fi))
    pairs.sort()

    matches: dict[int, int] = {}
    used_faces: set[int] = set()
    for _, tid, fi in pairs:
        if tid in matches or fi in used_faces:
            continue
        matches[tid] = fi
        used_faces.add(fi)
    return matches


def snnts_step(
    tracks: Sequence[TrackDetection],
    faces: Iterable[FaceObservation],
    memory: IdentityMemory,
    cfg: FusionConfig,
    t: float,
) -> tuple[list[IdentifiedPerson], IdentityMemory]:
    """Fuse one frame of tracks and faces; returns the output and new memory."""
    ids = [d.track_id for d in tracks]
    if len(set(ids)) != len(ids):
        raise DuplicateTrackError(f"duplicate track ids in frame: {ids}")

    named = [f for f in faces if f.name != UNKNOWN]
    track_bearings = [(d.track_id, heading_of_track(d)) for d in tracks]
    face_bearings = [(i, heading_of_face(f, cfg.camera)) for i, f in enumerate(named)]
    matches = associate(track_bearings, face_bearings, cfg.theta_thres)

    entries = dict(memory.items())
    out = []
    for d in tracks:
        fi = matches.get(d.track_id)
        if fi is not None:
            name = named[fi].name
            entries[d.track_id] = MemoryEntry(name, t)
            out.append(IdentifiedPerson(name, d.position, d.track_id, Source.FACE_MATCHED))
            continue
        prev = entries.get(d.track_id)
        if prev is not None:
            if prev.frames_absent:
                entries[d.track_id] = MemoryEntry(prev.name, prev.confirmed_at)
            out.append(IdentifiedPerson(prev.name, d.position, d.track_id, Source.MEMORY_CARRIED))
        else:
            out.append(IdentifiedPerson(UNKNOWN, d.position, d.track_id, Source.UNIDENTIFIED))

    present = set(ids)
    for tid in list(entries):
        if tid in present:
            continue
        e = entries[tid]
        if e.frames_absent + 1 > cfg.memory_ttl:
            del entries[tid]
        else:
            entries[tid] = MemoryEntry(e.name, e.confirmed_at, e.frames_absent + 1)
    return out, IdentityMemory(entries)


class SnntsFusion:
    """Stateful convenience wrapper owning the identity memory of one pipeline."""

    def __init__(self, cfg: FusionConfig | None = None):
        self.cfg = cfg or FusionConfig()
        self.memory = IdentityMemory()

    def step(self, tracks, faces, t: float) -> list[IdentifiedPerson]:
        out, self.memory = snnts_step(tracks, faces, self.memory, self.cfg, t)
        return out
