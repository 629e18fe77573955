"""The two comparison methods.

``facenet_only_step`` localises each recognised face from its bearing and a
depth lookup, with no temporal linking.  ``labeled_tracker_step`` is the
anonymous tracker whose tracks were hand-labelled on the first frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fusion import UNKNOWN, FaceObservation, IdentifiedPerson, Source, TrackDetection, heading_of_face
from .geometry import CameraIntrinsics, RobotFramePoint, angular_distance
from .world import TRACK_HEIGHT, WorldState

LABEL_GATE = 0.5


@dataclass
class DepthNoiseConfig:
    depth_sigma: float = 0.1
    edge_fusion_prob: float = 0.15
    edge_fusion_min: float = 2.0
    edge_fusion_max: float = 6.0

    def __post_init__(self):
        if not 0.0 <= self.edge_fusion_prob <= 1.0:
            raise ValueError("edge_fusion_prob is not a probability")
        if self.depth_sigma < 0 or self.edge_fusion_min > self.edge_fusion_max:
            raise ValueError("invalid depth noise parameters")

    @classmethod
    def noise_free(cls) -> "DepthNoiseConfig":
        return cls(depth_sigma=0.0, edge_fusion_prob=0.0)


def depth_along_bearing(world: WorldState, bearing: float) -> float | None:
    """Range of the nearest body covering ``bearing``, else of the closest-in-bearing body.

    Mimics reading the point cloud inside a face bounding box.
    """
    best = None
    fallback = None
    for p in world.persons:
        rel = world.relative(p)
        r = rel.range
        if r <= 0:
            continue
        gap = angular_distance(rel.bearing, bearing)
        if gap < math.asin(min(1.0, p.body_radius / r)):
            if best is None or r < best:
                best = r
        if fallback is None or gap < fallback[0]:
            fallback = (gap, r)
    if best is not None:
        return best
    return None if fallback is None else fallback[1]


def facenet_only_step(
    faces: Sequence[FaceObservation],
    world: WorldState,
    cam: CameraIntrinsics,
    depth_noise: DepthNoiseConfig,
    rng: np.random.Generator,
) -> list[IdentifiedPerson]:
    out = []
    for i, f in enumerate(faces):
        if f.name == UNKNOWN:
            continue
        theta = heading_of_face(f, cam)
        r = depth_along_bearing(world, theta)
        if r is None:
            continue
        if depth_noise.depth_sigma > 0:
            r += rng.normal(0.0, depth_noise.depth_sigma)
        if depth_noise.edge_fusion_prob > 0 and rng.random() < depth_noise.edge_fusion_prob:
            r += rng.uniform(depth_noise.edge_fusion_min, depth_noise.edge_fusion_max)
        r = max(r, 0.0)
        pos = RobotFramePoint(r * math.cos(theta), r * math.sin(theta), TRACK_HEIGHT)
        # no track linking: the face index stands in for an id
        out.append(IdentifiedPerson(f.name, pos, -(i + 1), Source.FACE_MATCHED))
    return out


def labeled_tracker_step(
    tracks: Sequence[TrackDetection],
    label_map: dict[int, str],
    frame_index: int,
    world: WorldState,
) -> tuple[list[IdentifiedPerson], dict[int, str]]:
    """Emit tracks under their first-frame labels; labels are never revised."""
    if frame_index == 0:
        label_map = dict(label_map)
        pairs = []
        for d in tracks:
            for p in world.persons:
                rel = world.relative(p)
                dist = math.hypot(d.position.x - rel.x, d.position.y - rel.y)
                if dist <= LABEL_GATE:
                    pairs.append((dist, d.track_id, p.name))
        pairs.sort()
        taken: set[str] = set()
        for _, tid, name in pairs:
            if tid in label_map or name in taken:
                continue
            label_map[tid] = name
            taken.add(name)
    out = []
    for d in tracks:
        name = label_map.get(d.track_id)
        if name is None:
            out.append(IdentifiedPerson(UNKNOWN, d.position, d.track_id, Source.UNIDENTIFIED))
        else:
            out.append(IdentifiedPerson(name, d.position, d.track_id, Source.MEMORY_CARRIED))
    return out, label_map
