"""Closed-loop simulation: world -> sensors -> method -> controller -> world."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

from .baselines import DepthNoiseConfig, facenet_only_step, labeled_tracker_step
from .control import ControllerConfig, FollowController, integrate_robot
from .fusion import FusionConfig, IdentifiedPerson, SnntsFusion
from .geometry import Pose2D, robot_to_world_frame
from .metrics import D_MATCH, MOT_THRESHOLD, FrameRecord, Hypothesis, MetricReport, evaluate
from .scenarios import build_scenario
from .world import (
    DT,
    SensorNoiseConfig,
    SyntheticTrackerState,
    step_world,
    synth_face_step,
    synth_tracker_step,
)


class Method(str, Enum):
    SNNTS = "snnts"
    FACENET = "facenet"
    LABELED = "labeled"

    @property
    def label(self) -> str:
        return {"snnts": "SNNTS", "facenet": "FaceNetOnly", "labeled": "LabeledTracker"}[self.value]


@dataclass
class MetricThresholds:
    d_match: float = D_MATCH
    match_threshold: float = MOT_THRESHOLD


@dataclass
class RunConfig:
    scenario: str = "Exp1"
    method: Method = Method.SNNTS
    seed: int = 0
    noise: SensorNoiseConfig = field(default_factory=SensorNoiseConfig)
    depth: DepthNoiseConfig = field(default_factory=DepthNoiseConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    control: ControllerConfig = field(default_factory=ControllerConfig)
    metrics: MetricThresholds = field(default_factory=MetricThresholds)

    def to_dict(self) -> dict:
        """Flat, JSON-friendly description of every setting."""
        out = {"scenario": self.scenario, "method": self.method.value, "seed": self.seed}
        for prefix in ("noise", "depth", "fusion", "control", "metrics"):
            obj = getattr(self, prefix)
            for f in fields(obj):
                v = getattr(obj, f.name)
                if f.name == "camera":
                    out[f"{prefix}.camera.f_x"] = v.f_x
                    out[f"{prefix}.camera.c_x"] = v.c_x
                    out[f"{prefix}.camera.image_width"] = v.image_width
                else:
                    out[f"{prefix}.{f.name}"] = v
        return out


@dataclass
class FrameLog:
    """Everything one frame produced, in the shape the trace writes it."""

    index: int
    t: float
    robot: Pose2D
    ground_truth: list
    tracks: list
    faces: list
    output: list[IdentifiedPerson]
    hypotheses: tuple[Hypothesis, ...]
    command: tuple[float, float]


@dataclass
class RunResult:
    config: RunConfig
    frames: list[FrameRecord]
    logs: list[FrameLog]
    report: MetricReport
    target: str | None


def to_hypotheses(output, robot: Pose2D) -> tuple[Hypothesis, ...]:
    hyps = []
    for p in output:
        wx, wy = robot_to_world_frame(p.position, robot)
        hyps.append(Hypothesis(p.name, wx, wy, p.track_id, p.source.value))
    return tuple(hyps)


def run(config: RunConfig) -> RunResult:
    script = build_scenario(config.scenario)
    method = Method(config.method)
    noise = replace(config.noise, rng_seed=config.seed)
    # independent streams so every method sees the same tracker/face noise
    tracker_ss, face_ss, depth_ss = np.random.SeedSequence(config.seed).spawn(3)
    rng_tracker = np.random.default_rng(tracker_ss)
    rng_face = np.random.default_rng(face_ss)
    rng_depth = np.random.default_rng(depth_ss)

    cam = config.fusion.camera
    tracker = SyntheticTrackerState()
    fusion = SnntsFusion(config.fusion)
    label_map: dict[int, str] = {}
    controller = FollowController(script.robot_mode, script.target_name, config.control)
    robot = script.robot_start

    frames: list[FrameRecord] = []
    logs: list[FrameLog] = []
    for k in range(script.n_frames):
        t = k * DT
        world = step_world(script, t, robot)
        tracks, tracker = synth_tracker_step(tracker, world, noise, rng_tracker)
        faces = synth_face_step(world, cam, noise, rng_face)
        if method is Method.SNNTS:
            output = fusion.step(tracks, faces, t)
        elif method is Method.FACENET:
            output = facenet_only_step(faces, world, cam, config.depth, rng_depth)
        else:
            output, label_map = labeled_tracker_step(tracks, label_map, k, world)

        hyps = to_hypotheses(output, robot)
        gt = tuple((p.name, p.pose.x, p.pose.y) for p in world.persons)
        frames.append(FrameRecord(t, gt, hyps, robot))
        cmd = controller.update(output)
        logs.append(
            FrameLog(
                k,
                t,
                robot,
                [(p.name, p.pose.x, p.pose.y, p.pose.heading) for p in world.persons],
                tracks,
                faces,
                output,
                hyps,
                (cmd.v, cmd.omega),
            )
        )
        if cmd.v != 0.0 or cmd.omega != 0.0:
            robot = integrate_robot(robot, cmd, DT)

    report = evaluate(frames, script.target_name, config.metrics.d_match, config.metrics.match_threshold)
    return RunResult(config, frames, logs, report, script.target_name)


def final_target_distance(result: RunResult) -> float:
    """Distance between robot and target person at the last frame."""
    last = result.logs[-1]
    name = result.target
    for n, x, y, _ in last.ground_truth:
        if n == name:
            return math.hypot(x - last.robot.x, y - last.robot.y)
    raise KeyError(name)
