"""Command line: ``simulate``, ``evaluate`` and ``compare``.

Exit codes: 0 success, 2 configuration error, 3 I/O or trace schema error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .metrics import MetricReport, aggregate_report, evaluate
from .runner import Method, RunConfig, run
from .scenarios import SCENARIO_IDS
from .trace import (
    ConfigError,
    SchemaError,
    frame_record,
    load_config,
    parse_method,
    read_trace,
    report_csv,
    table_csv,
    write_trace,
)

log = logging.getLogger("idtrack")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

METHOD_ORDER = (Method.FACENET, Method.LABELED, Method.SNNTS)
DEFAULT_SEEDS = tuple(range(20))


class RunError(RuntimeError):
    pass


def parse_scenario(name: str) -> str:
    sid = name.strip().capitalize()
    if sid not in SCENARIO_IDS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {', '.join(s.lower() for s in SCENARIO_IDS)}")
    return sid


def parse_seeds(text: str) -> list[int]:
    """``"0-19"``, ``"1,4,7"`` or a mix such as ``"0-3,10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            seeds.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise ConfigError(f"bad seed list {text!r}") from None
    if not seeds:
        raise ConfigError("seed list is empty")
    return seeds


def _meta(cfg: RunConfig) -> dict:
    return {"scenario": cfg.scenario, "method": cfg.method.value, "seed": cfg.seed}


def run_paths(out_dir: Path, cfg: RunConfig) -> tuple[Path, Path]:
    stem = f"{cfg.scenario.lower()}_{cfg.method.value}_seed{cfg.seed}"
    return out_dir / f"{stem}.trace.jsonl", out_dir / f"{stem}.report.csv"


def cmd_simulate(cfg: RunConfig, out_dir: Path) -> tuple[Path, Path, MetricReport]:
    result = run(cfg)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path, report_path = run_paths(out_dir, cfg)
        write_trace(result, trace_path)
        report_path.write_text(report_csv(result.report, _meta(cfg)))
    except OSError as e:
        raise OSError(f"cannot write outputs to {out_dir}: {e}") from e
    return trace_path, report_path, result.report


def cmd_evaluate(trace_path: Path, d_match: float | None = None, match_threshold: float | None = None) -> tuple[MetricReport, dict]:
    header, logs = read_trace(trace_path)
    conf = header.get("config", {})
    d = d_match if d_match is not None else conf.get("metrics.d_match")
    m = match_threshold if match_threshold is not None else conf.get("metrics.match_threshold")
    frames = [frame_record(lg) for lg in logs]
    kw = {}
    if d is not None:
        kw["d_match"] = d
    if m is not None:
        kw["match_threshold"] = m
    report = evaluate(frames, header.get("target"), **kw)
    return report, {"scenario": header["scenario"], "method": header["method"], "seed": header["seed"]}


def _grid_job(args) -> tuple[str, str, int, MetricReport]:
    scenario, method, seed, base = args
    cfg = replace(base, scenario=scenario, method=method, seed=seed)
    try:
        return scenario, method.value, seed, run(cfg).report
    except Exception as e:  # noqa: BLE001 - re-raised with grid coordinates
        raise RunError(f"run {scenario}/{method.value}/seed={seed} failed: {e!r}") from e


def run_grid(seeds, base: RunConfig | None = None, scenarios=SCENARIO_IDS, methods=METHOD_ORDER, jobs: int = 1):
    """Reports keyed by (scenario, method value, seed)."""
    if not seeds:
        raise ConfigError("seed list is empty")
    base = base or RunConfig()
    todo = [(s, m, seed, base) for s in scenarios for m in methods for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            done = list(pool.map(_grid_job, todo))
    else:
        done = [_grid_job(a) for a in todo]
    return {(s, m, seed): rep for s, m, seed, rep in done}


def summarise(grid: dict, scenarios=SCENARIO_IDS, methods=METHOD_ORDER) -> dict:
    """Seed-averaged report per (scenario, method) plus a cross-scenario 'Average'."""
    out = {}
    for m in methods:
        per = []
        for s in scenarios:
            reps = [r for (gs, gm, _), r in grid.items() if gs == s and gm == m.value]
            out[(s, m.value)] = aggregate_report(reps)
            per.append(out[(s, m.value)])
        out[("Average", m.value)] = aggregate_report(per)
    return out


def write_compare_tables(summary: dict, out_dir: Path, seeds, scenarios=SCENARIO_IDS, methods=METHOD_ORDER) -> list[Path]:
    meta = {"seeds": f"{min(seeds)}-{max(seeds)}" if list(seeds) == list(range(min(seeds), max(seeds) + 1)) else "+".join(map(str, seeds))}
    labels = [m.label for m in methods]
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = [[s] + [summary[(s, m.value)].avg_abs_error for m in methods] for s in list(scenarios) + ["Average"]]
    t1 = out_dir / "table1_tracking_error.csv"
    t1.write_text(table_csv(["scenario"] + labels, rows, meta))

    rows = [
        ["MOTP"] + [summary[("Average", m.value)].motp for m in methods],
        ["MOTA"] + [summary[("Average", m.value)].mota for m in methods],
    ]
    t2 = out_dir / "table2_clearmot.csv"
    t2.write_text(table_csv(["metric"] + labels, rows, meta))

    rows = []
    for s in scenarios:
        for m in methods:
            r = summary[(s, m.value)]
            rows.append([s, "all", m.label, r.pct_correct, r.pct_incorrect, r.pct_undetected])
    for s in scenarios:
        for m in methods:
            r = summary[(s, m.value)]
            if r.target_correct + r.target_incorrect + r.target_undetected == 0:
                continue
            rows.append([s, "target", m.label, r.target_pct_correct, r.target_pct_incorrect, r.target_pct_undetected])
    f8 = out_dir / "fig8_frame_classification.csv"
    f8.write_text(table_csv(["scenario", "variant", "method", "correct_pct", "incorrect_pct", "undetected_pct"], rows, meta))
    return [t1, t2, f8]


def cmd_compare(seeds, out_dir: Path, base: RunConfig | None = None, jobs: int = 1) -> list[Path]:
    grid = run_grid(seeds, base, jobs=jobs)
    return write_compare_tables(summarise(grid), out_dir, seeds)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idtrack", description="Identity-specific person tracking simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one closed-loop scenario and write its trace and report")
    s.add_argument("--scenario", default=None, help="exp1..exp5")
    s.add_argument("--method", default=None, help="snnts | facenet | labeled")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--config", type=Path, default=None, help="key = value override file")
    s.add_argument("--out", type=Path, default=Path("runs"))

    e = sub.add_parser("evaluate", help="recompute the metric report from a trace file")
    e.add_argument("--trace", type=Path, required=True)
    e.add_argument("--d-match", type=float, default=None)
    e.add_argument("--match-threshold", type=float, default=None)
    e.add_argument("--out", type=Path, default=None, help="report path (default: stdout)")

    c = sub.add_parser("compare", help="run the scenario x method x seed grid and write summary tables")
    c.add_argument("--seeds", default="0-19")
    c.add_argument("--config", type=Path, default=None)
    c.add_argument("--out", type=Path, default=Path("results"))
    c.add_argument("--jobs", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "simulate":
            cfg = load_config(args.config) if args.config else RunConfig()
            if args.scenario is not None:
                cfg = replace(cfg, scenario=args.scenario)
            if args.method is not None:
                cfg = replace(cfg, method=parse_method(args.method))
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            cfg = replace(cfg, scenario=parse_scenario(cfg.scenario))
            trace_path, report_path, report = cmd_simulate(cfg, args.out)
            print(f"trace:  {trace_path}")
            print(f"report: {report_path}")
            print(f"avg_abs_error={report.avg_abs_error:.3f} m  motp={report.motp:.3f} m  mota={report.mota:.3f}")
        elif args.command == "evaluate":
            report, meta = cmd_evaluate(args.trace, args.d_match, args.match_threshold)
            text = report_csv(report, meta)
            if args.out is None:
                sys.stdout.write(text)
            else:
                args.out.write_text(text)
        elif args.command == "compare":
            seeds = parse_seeds(args.seeds)
            base = load_config(args.config) if args.config else RunConfig()
            for path in cmd_compare(seeds, args.out, base, args.jobs):
                print(path)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
