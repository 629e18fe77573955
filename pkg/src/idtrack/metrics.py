"""Evaluation: tracking error, per-frame identity classification, CLEAR-MOT.

All functions work on world-frame :class:`FrameRecord` sequences, so they can
be recomputed offline from a trace file.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .fusion import UNKNOWN
from .geometry import Pose2D

D_MATCH = 0.75
MOT_THRESHOLD = 1.0


@dataclass(frozen=True)
class Hypothesis:
    name: str
    x: float
    y: float
    track_id: int = 0
    source: str = ""

    @property
    def named(self) -> bool:
        return self.name != UNKNOWN


@dataclass(frozen=True)
class FrameRecord:
    t: float
    ground_truth: tuple[tuple[str, float, float], ...]
    hypotheses: tuple[Hypothesis, ...]
    robot: Pose2D = Pose2D(0.0, 0.0, 0.0)


class EmptyMetricError(ValueError):
    pass


class Label(str, Enum):
    CORRECT = "Correct"
    INCORRECT = "Incorrect"
    UNDETECTED = "Undetected"


def _dist(x0, y0, x1, y1) -> float:
    return math.hypot(x0 - x1, y0 - y1)


def _canonical(hyps: Iterable[Hypothesis]) -> list[Hypothesis]:
    return sorted(hyps, key=lambda h: (h.name, h.x, h.y, h.track_id))


def avg_abs_error(frames: Sequence[FrameRecord]) -> float:
    """Mean distance from each person to the hypothesis carrying their name.

    A person whose name is absent from a frame is scored against the nearest
    hypothesis of any name; frames with no hypotheses at all are skipped.
    """
    total = 0.0
    count = 0
    for fr in frames:
        if not fr.hypotheses:
            continue
        for name, gx, gy in fr.ground_truth:
            own = [h for h in fr.hypotheses if h.name == name]
            pool = own if own else fr.hypotheses
            total += min(_dist(gx, gy, h.x, h.y) for h in pool)
            count += 1
    if count == 0:
        raise EmptyMetricError("no hypotheses to score")
    return total / count


def classify_person(frame: FrameRecord, name: str, d_match: float = D_MATCH) -> Label:
    gt = [(gx, gy) for n, gx, gy in frame.ground_truth if n == name]
    if not gt:
        raise KeyError(name)
    gx, gy = gt[0]
    own = [h for h in frame.hypotheses if h.name == name]
    if not own:
        return Label.UNDETECTED
    if min(_dist(gx, gy, h.x, h.y) for h in own) <= d_match:
        return Label.CORRECT
    return Label.INCORRECT


def classify_frame(
    frame: FrameRecord, d_match: float = D_MATCH, target: str | None = None
) -> tuple[dict[str, Label], Label]:
    """Per-person labels and the frame label.

    The frame is Correct only if every evaluated person is, Incorrect if any
    person is, and Undetected otherwise.  With ``target`` only that person
    is evaluated.
    """
    if d_match <= 0:
        raise ValueError("d_match must be positive")
    names = [target] if target is not None else [n for n, _, _ in frame.ground_truth]
    labels = {n: classify_person(frame, n, d_match) for n in names}
    vals = set(labels.values())
    if vals <= {Label.CORRECT}:
        overall = Label.CORRECT
    elif Label.INCORRECT in vals:
        overall = Label.INCORRECT
    else:
        overall = Label.UNDETECTED
    return labels, overall


@dataclass(frozen=True)
class ClearMot:
    motp: float
    mota: float
    fp: int
    fn: int
    mismatches: int
    gt_count: int
    matches: int


def _hyp_key(h: Hypothesis) -> str:
    return h.name if h.named else f"track:{h.track_id}"


def clear_mot(
    frames: Sequence[FrameRecord],
    match_threshold: float = MOT_THRESHOLD,
    named_only: bool = True,
    carry_forward: bool = True,
) -> ClearMot:
    """CLEAR-MOT precision/accuracy with greedy minimum-distance matching.

    Hypotheses are identified by their emitted label, so a person whose
    best-matching label changes between frames counts a mismatch.  By default
    only identity-bearing (named) hypotheses take part.
    """
    if not frames:
        raise EmptyMetricError("empty frame sequence")
    if match_threshold <= 0:
        raise ValueError("match_threshold must be positive")
    last: dict[str, str] = {}
    fp = fn = mm = gt_count = matches = 0
    dist_sum = 0.0
    for fr in frames:
        hyps = _canonical(h for h in fr.hypotheses if h.named or not named_only)
        keys = [_hyp_key(h) for h in hyps]
        gts = sorted(fr.ground_truth)
        gt_count += len(gts)
        free_h = set(range(len(hyps)))
        free_g = set(range(len(gts)))
        frame_match: dict[int, int] = {}

        if carry_forward:
            for gi, (name, gx, gy) in enumerate(gts):
                prev = last.get(name)
                if prev is None:
                    continue
                best = None
                for hi in free_h:
                    if keys[hi] != prev:
                        continue
                    d = _dist(gx, gy, hyps[hi].x, hyps[hi].y)
                    if d <= match_threshold and (best is None or (d, hi) < best):
                        best = (d, hi)
                if best is not None:
                    frame_match[gi] = best[1]
                    free_h.discard(best[1])
                    free_g.discard(gi)

        pairs = []
        for gi in free_g:
            _, gx, gy = gts[gi]
            for hi in free_h:
                d = _dist(gx, gy, hyps[hi].x, hyps[hi].y)
                if d <= match_threshold:
                    pairs.append((d, gi, hi))
        pairs.sort()
        for d, gi, hi in pairs:
            if gi in frame_match or hi not in free_h:
                continue
            frame_match[gi] = hi
            free_h.discard(hi)
            prev = last.get(gts[gi][0])
            if prev is not None and prev != keys[hi]:
                mm += 1

        for gi, hi in frame_match.items():
            name, gx, gy = gts[gi]
            dist_sum += _dist(gx, gy, hyps[hi].x, hyps[hi].y)
            last[name] = keys[hi]
        matches += len(frame_match)
        fn += len(gts) - len(frame_match)
        fp += len(hyps) - len(frame_match)

    if gt_count == 0:
        raise EmptyMetricError("no ground-truth objects")
    motp = dist_sum / matches if matches else math.nan
    mota = 1.0 - (fn + fp + mm) / gt_count
    return ClearMot(motp, mota, fp, fn, mm, gt_count, matches)


@dataclass
class MetricReport:
    avg_abs_error: float
    frames_correct: int
    frames_incorrect: int
    frames_undetected: int
    pct_correct: float
    pct_incorrect: float
    pct_undetected: float
    target_correct: int
    target_incorrect: int
    target_undetected: int
    target_pct_correct: float
    target_pct_incorrect: float
    target_pct_undetected: float
    motp: float
    mota: float
    fp: int
    fn: int
    mismatches: int
    gt_count: int

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def count_columns(cls) -> list[str]:
        return [f.name for f in fields(cls) if f.type in ("int", int)]

    def as_dict(self) -> dict:
        return asdict(self)


def _pct(counts: list[int]) -> list[float]:
    n = sum(counts)
    if n == 0:
        return [math.nan] * len(counts)
    return [100.0 * c / n for c in counts]


def evaluate(
    frames: Sequence[FrameRecord],
    target: str | None = None,
    d_match: float = D_MATCH,
    match_threshold: float = MOT_THRESHOLD,
) -> MetricReport:
    try:
        err = avg_abs_error(frames)
    except EmptyMetricError:
        err = math.nan

    counts = {Label.CORRECT: 0, Label.INCORRECT: 0, Label.UNDETECTED: 0}
    tcounts = dict.fromkeys(counts, 0)
    for fr in frames:
        counts[classify_frame(fr, d_match)[1]] += 1
        if target is not None:
            tcounts[classify_frame(fr, d_match, target)[1]] += 1
    order = [Label.CORRECT, Label.INCORRECT, Label.UNDETECTED]
    pc = _pct([counts[k] for k in order])
    tc = _pct([tcounts[k] for k in order])
    mot = clear_mot(frames, match_threshold)
    return MetricReport(
        err,
        *(counts[k] for k in order),
        *pc,
        *(tcounts[k] for k in order),
        *tc,
        mot.motp,
        mot.mota,
        mot.fp,
        mot.fn,
        mot.mismatches,
        mot.gt_count,
    )


def aggregate_report(per_scenario: Sequence[MetricReport]) -> MetricReport:
    """Unweighted mean of the scalar metrics (NaNs skipped); counts summed."""
    if not per_scenario:
        raise ValueError("nothing to aggregate")
    counts = set(MetricReport.count_columns())
    vals = {}
    for col in MetricReport.columns():
        xs = [getattr(r, col) for r in per_scenario]
        if col in counts:
            vals[col] = int(sum(xs))
        else:
            arr = np.asarray(xs, dtype=float)
            vals[col] = float(np.mean(arr[~np.isnan(arr)])) if np.any(~np.isnan(arr)) else math.nan
    return MetricReport(**vals)
