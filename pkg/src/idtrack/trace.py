"""JSONL trace files, CSV metric reports and key=value config files."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import fields, replace
from pathlib import Path
from typing import Iterable

from .fusion import FaceObservation, IdentifiedPerson, Source, TrackDetection
from .geometry import CameraIntrinsics, Pose2D, RobotFramePoint
from .metrics import FrameRecord, Hypothesis, MetricReport
from .runner import FrameLog, Method, RunConfig, RunResult

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


class SchemaError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


# --- config ------------------------------------------------------------------


def _parse_value(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
        return raw[1:-1]
    return raw


def parse_config_text(text: str) -> dict[str, object]:
    """Flat ``dotted.key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value, got {line!r}")
        key, val = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"config line {n}: empty key")
        out[key] = _parse_value(val)
    return out


def _coerce(key: str, default, val):
    if isinstance(default, bool):
        ok = isinstance(val, bool)
    elif isinstance(default, int):
        ok = isinstance(val, int) and not isinstance(val, bool)
    elif isinstance(default, float):
        ok = isinstance(val, (int, float)) and not isinstance(val, bool)
        val = float(val) if ok else val
    else:
        ok = True
    if not ok:
        raise ConfigError(f"{key} expects {type(default).__name__}, got {val!r}")
    return val


def apply_overrides(cfg: RunConfig, overrides: dict[str, object]) -> RunConfig:
    top = {}
    groups: dict[str, dict] = {}
    for key, val in overrides.items():
        if "." not in key:
            top[key] = val
            continue
        prefix, name = key.split(".", 1)
        groups.setdefault(prefix, {})[name] = val

    for key, val in top.items():
        if key == "scenario":
            cfg = replace(cfg, scenario=str(val))
        elif key == "method":
            cfg = replace(cfg, method=parse_method(str(val)))
        elif key == "seed":
            cfg = replace(cfg, seed=int(val))
        else:
            raise ConfigError(f"unknown config key {key!r}")

    for prefix, vals in groups.items():
        if prefix not in ("noise", "depth", "fusion", "control", "metrics"):
            raise ConfigError(f"unknown config section {prefix!r}")
        obj = getattr(cfg, prefix)
        known = {f.name: f for f in fields(obj)}
        kw = {}
        cam = {}
        for name, val in vals.items():
            if name.startswith("camera.") and prefix == "fusion":
                cam[name.split(".", 1)[1]] = val
                continue
            if name not in known:
                raise ConfigError(f"unknown config key {prefix}.{name}")
            kw[name] = _coerce(f"{prefix}.{name}", getattr(obj, name), val)
        if cam:
            base = obj.camera
            try:
                kw["camera"] = CameraIntrinsics(
                    float(cam.pop("f_x", base.f_x)),
                    float(cam.pop("c_x", base.c_x)),
                    int(cam.pop("image_width", base.image_width)),
                )
            except ValueError as e:
                raise ConfigError(str(e)) from e
            if cam:
                raise ConfigError(f"unknown camera keys {sorted(cam)}")
        try:
            cfg = replace(cfg, **{prefix: replace(obj, **kw)})
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid {prefix} settings: {e}") from e
    return cfg


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return apply_overrides(base or RunConfig(), parse_config_text(text))


def parse_method(name: str) -> Method:
    try:
        return Method(name.lower())
    except ValueError:
        raise ConfigError(f"unknown method {name!r}; expected snnts, facenet or labeled") from None


# --- trace lines ---------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def header_line(result: RunResult) -> str:
    cfg = result.config
    return _dumps(
        {
            "kind": "header",
            "schema_version": SCHEMA_VERSION,
            "scenario": cfg.scenario,
            "method": cfg.method.value,
            "seed": cfg.seed,
            "target": result.target,
            "config": cfg.to_dict(),
        }
    )


def frame_to_json(log: FrameLog) -> dict:
    return {
        "kind": "frame",
        "schema_version": SCHEMA_VERSION,
        "frame": log.index,
        "t": log.t,
        "robot": {"x": log.robot.x, "y": log.robot.y, "heading": log.robot.heading},
        "ground_truth": [{"name": n, "x": x, "y": y, "heading": h} for n, x, y, h in log.ground_truth],
        "tracks": [
            {"track_id": d.track_id, "x": d.position.x, "y": d.position.y, "z": d.position.z} for d in log.tracks
        ],
        "faces": [{"name": f.name, "u": f.u, "v": f.v, "score": f.score} for f in log.faces],
        "output": [
            {
                "name": p.name,
                "track_id": p.track_id,
                "source": p.source.value,
                "x": p.position.x,
                "y": p.position.y,
                "z": p.position.z,
            }
            for p in log.output
        ],
        "hypotheses": [
            {"name": h.name, "track_id": h.track_id, "source": h.source, "x": h.x, "y": h.y} for h in log.hypotheses
        ],
        "command": {"v": log.command[0], "omega": log.command[1]},
    }


def frame_from_json(obj: dict) -> FrameLog:
    t = obj["t"]
    r = obj["robot"]
    return FrameLog(
        index=obj["frame"],
        t=t,
        robot=Pose2D(r["x"], r["y"], r["heading"]),
        ground_truth=[(g["name"], g["x"], g["y"], g["heading"]) for g in obj["ground_truth"]],
        tracks=[TrackDetection(d["track_id"], RobotFramePoint(d["x"], d["y"], d["z"]), t) for d in obj["tracks"]],
        faces=[FaceObservation(f["name"], f["u"], f["v"], f["score"], t) for f in obj["faces"]],
        output=[
            IdentifiedPerson(p["name"], RobotFramePoint(p["x"], p["y"], p["z"]), p["track_id"], Source(p["source"]))
            for p in obj["output"]
        ],
        hypotheses=tuple(Hypothesis(h["name"], h["x"], h["y"], h["track_id"], h["source"]) for h in obj["hypotheses"]),
        command=(obj["command"]["v"], obj["command"]["omega"]),
    )


def frame_record(log: FrameLog) -> FrameRecord:
    gt = tuple((n, x, y) for n, x, y, _ in log.ground_truth)
    return FrameRecord(log.t, gt, tuple(log.hypotheses), log.robot)


def write_trace(result: RunResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header_line(result) + "\n")
        for log in result.logs:
            fh.write(_dumps(frame_to_json(log)) + "\n")


def read_trace(path: str | Path) -> tuple[dict, list[FrameLog]]:
    """Parse a trace; raises :class:`SchemaError` naming the offending line."""
    header = None
    logs: list[FrameLog] = []
    last_t = -math.inf
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(n, f"not valid JSON ({e.msg})") from None
            if not isinstance(obj, dict):
                raise SchemaError(n, "expected a JSON object")
            if obj.get("schema_version") != SCHEMA_VERSION:
                raise SchemaError(n, f"schema_version {obj.get('schema_version')!r} != {SCHEMA_VERSION}")
            kind = obj.get("kind")
            if n == 1:
                if kind != "header":
                    raise SchemaError(n, "first line must be the header")
                header = obj
                continue
            if kind != "frame":
                raise SchemaError(n, f"unexpected record kind {kind!r}")
            try:
                log = frame_from_json(obj)
            except (KeyError, TypeError, ValueError) as e:
                raise SchemaError(n, f"malformed frame record ({e!r})") from None
            if not log.t > last_t:
                raise SchemaError(n, f"time {log.t} does not increase")
            last_t = log.t
            logs.append(log)
    if header is None:
        raise SchemaError(1, "empty trace")
    return header, logs


# --- CSV reports -----------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _meta_line(meta: dict) -> str:
    parts = [f"schema_version={SCHEMA_VERSION}"] + [f"{k}={v}" for k, v in meta.items()]
    return "# " + " ".join(parts)


def report_csv(report: MetricReport, meta: dict) -> str:
    buf = io.StringIO()
    buf.write(_meta_line(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = MetricReport.columns()
    w.writerow(cols)
    w.writerow([_fmt(getattr(report, c)) for c in cols])
    return buf.getvalue()


def read_report_csv(path: str | Path) -> MetricReport:
    lines = Path(path).read_text().splitlines()
    rows = list(csv.reader(line for line in lines if not line.startswith("#")))
    cols, vals = rows[0], rows[1]
    counts = set(MetricReport.count_columns())
    kw = {c: int(v) if c in counts else float(v) for c, v in zip(cols, vals)}
    return MetricReport(**kw)


def table_csv(header: list[str], rows: Iterable[list], meta: dict) -> str:
    buf = io.StringIO()
    buf.write(_meta_line(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()
