"""Command-line front end: profile, aggregate, simulate, suppress.

Every command is a thin shell over the library; outputs are JSON-first
with CSV mirrors and carry a format_version. Files are written
atomically (temp + rename) so parallel runs never interleave partial
reports. Exit codes: 0 success, 1 internal error, 2 user/input error.

Wall-clock overhead of suppression checks varies run to run, so the
suppress command writes it to a separate timing sidecar and keeps the
main report byte-reproducible.

Set WATTLENS_LOG to change log verbosity (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .alignment import MODE_SAMPLE_MEAN, MODES, assign_token_energies
from .errors import AllTracesRemoved, WattlensError
from .metrics import (
    OUTLIER_IQR,
    OUTLIER_RULES,
    TraceMetrics,
    aggregate_workload,
    collect_trace_metrics,
)
from .model import DecodingTrend, PhaseBreakdown
from .simulator import (
    generate_scenario_trace,
    list_presets,
    load_preset,
    load_scenario_file,
)
from .suppression import SuppressionConfig, evaluate_corpus, load_corpus
from .traceio import parse_trace, write_trace

log = logging.getLogger("wattlens")

REPORT_VERSION = 1


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _clean(value):
    """NaN is not valid JSON; report missing stats as null."""
    if isinstance(value, float) and value != value:
        return None
    return value


# ---------------------------------------------------------------------------
# profile

def _profile_one(manifest_path: str, mode: str, out_dir: Path) -> dict:
    trace = parse_trace(manifest_path)
    energies = assign_token_energies(trace, mode=mode)
    tm = collect_trace_metrics(trace, energies)

    csv_name = f"{trace.manifest.trace_id}.tokens.csv"
    rows = [
        [te.index, _fmt(te.start_t), _fmt(te.end_t), _fmt(te.duration_s),
         _fmt(te.energy_j), _fmt(te.estimated)]
        for te in energies
    ]
    _atomic_write(
        out_dir / csv_name,
        _csv_text(["index", "start_t", "end_t", "duration_s", "energy_j", "estimated"], rows),
    )

    breakdown = tm.breakdown
    report = {
        "format_version": REPORT_VERSION,
        "trace_id": trace.manifest.trace_id,
        "model_name": trace.manifest.model_name,
        "workload": trace.manifest.workload,
        "input_token_count": trace.manifest.input_token_count,
        "max_new_tokens": trace.manifest.max_new_tokens,
        "mode": mode,
        "output_tokens": tm.output_tokens,
        "estimated_token_count": sum(te.estimated for te in energies),
        "breakdown": {k: _clean(v) for k, v in asdict(breakdown).items()},
        "trend": {k: _clean(v) for k, v in asdict(tm.trend).items()} if tm.trend else None,
        "energy_per_token_j": _clean(breakdown.total_j / tm.output_tokens),
        "energy_per_decode_token_j": _clean(
            breakdown.decode_j / breakdown.decode_token_count
            if breakdown.decode_token_count >= 1
            else float("nan")
        ),
        "series_csv": csv_name,
    }
    _atomic_write(out_dir / f"{trace.manifest.trace_id}.report.json", _json_dumps(report))
    return report


def cmd_profile(args) -> int:
    out_dir = Path(args.out)
    failures = []

    def work(path):
        try:
            return path, _profile_one(path, args.mode, out_dir), None
        except WattlensError as err:
            return path, None, err

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(work, args.manifests))

    for path, report, err in results:
        if err is not None:
            failures.append((path, err))
        else:
            log.info("profiled %s -> %s.report.json", path, report["trace_id"])
    for path, err in failures:
        print(f"{path}: {type(err).__name__}: {err}", file=sys.stderr)
    return 2 if failures else 0


# ---------------------------------------------------------------------------
# aggregate

def _load_report_metrics(report_path: Path) -> TraceMetrics:
    with open(report_path, encoding="utf-8") as f:
        report = json.load(f)
    b = report["breakdown"]
    breakdown = PhaseBreakdown(
        prefill_j=b["prefill_j"],
        decode_j=b["decode_j"],
        total_j=b["total_j"],
        prefill_fraction=b["prefill_fraction"],
        decode_token_count=b["decode_token_count"],
    )
    trend = None
    if report.get("trend"):
        trend = DecodingTrend(**report["trend"])

    ordinals: list[int] = []
    energies: list[float] = []
    series = report_path.parent / report["series_csv"]
    with open(series, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            index = int(row["index"])
            if index >= 2 and row["estimated"] != "true":
                ordinals.append(index - 1)
                energies.append(float(row["energy_j"]))
    return TraceMetrics(
        trace_id=report["trace_id"],
        model_name=report["model_name"],
        workload=report["workload"],
        breakdown=breakdown,
        trend=trend,
        output_tokens=report["output_tokens"],
        decode_ordinals=tuple(ordinals),
        decode_energies=tuple(energies),
    )


def cmd_aggregate(args) -> int:
    report_dir = Path(args.report_dir)
    report_paths = sorted(report_dir.glob("*.report.json"))
    if not report_paths:
        print(f"no reports found in {report_dir}", file=sys.stderr)
        return 2

    groups: dict[tuple[str, str], list[TraceMetrics]] = {}
    for path in report_paths:
        tm = _load_report_metrics(path)
        groups.setdefault((tm.model_name, tm.workload), []).append(tm)

    summaries = []
    failed = False
    for key in sorted(groups):
        try:
            summary = aggregate_workload(groups[key], outlier_rule=args.outliers)
        except AllTracesRemoved as err:
            print(f"{key[0]}/{key[1]}: {err}", file=sys.stderr)
            failed = True
            continue
        entry = {k: _clean(v) for k, v in asdict(summary).items() if k != "pooled_trend"}
        entry["pooled_trend"] = (
            {k: _clean(v) for k, v in asdict(summary.pooled_trend).items()}
            if summary.pooled_trend
            else None
        )
        summaries.append(entry)

    out_dir = Path(args.out)
    _atomic_write(
        out_dir / "summaries.json",
        _json_dumps({"format_version": REPORT_VERSION, "outlier_rule": args.outliers,
                     "summaries": summaries}),
    )

    header = [
        "model_name", "workload", "n_traces", "n_outliers_removed",
        "total_j_mean", "total_j_std",
        "energy_per_token_j_mean", "energy_per_token_j_std",
        "energy_per_decode_token_j_mean", "energy_per_decode_token_j_std",
        "output_tokens_mean", "output_tokens_std", "prefill_fraction_mean",
        "pooled_intercept_j", "pooled_slope_j_per_token", "pooled_growth_pct", "pooled_r2",
    ]
    rows = []
    for s in summaries:
        trend = s["pooled_trend"] or {}
        rows.append([
            s["model_name"], s["workload"], s["n_traces"], s["n_outliers_removed"],
            _fmt(s["total_j_mean"]), _fmt(s["total_j_std"]),
            _fmt(s["energy_per_token_j_mean"]), _fmt(s["energy_per_token_j_std"]),
            _fmt(s["energy_per_decode_token_j_mean"]) if s["energy_per_decode_token_j_mean"] is not None else "",
            _fmt(s["energy_per_decode_token_j_std"]) if s["energy_per_decode_token_j_std"] is not None else "",
            _fmt(s["output_tokens_mean"]), _fmt(s["output_tokens_std"]),
            _fmt(s["prefill_fraction_mean"]),
            _fmt(trend["intercept_j"]) if trend else "",
            _fmt(trend["slope_j_per_token"]) if trend else "",
            _fmt(trend["growth_pct"]) if trend else "",
            _fmt(trend["r2"]) if trend else "",
        ])
    _atomic_write(out_dir / "summaries.csv", _csv_text(header, rows))
    if failed:
        return 2
    log.info("aggregated %d reports into %d summaries", len(report_paths), len(summaries))
    return 0


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    if bool(args.preset) == bool(args.config):
        print("exactly one of --preset or --config is required", file=sys.stderr)
        return 2
    try:
        scenario = load_preset(args.preset) if args.preset else load_scenario_file(args.config)
    except (FileNotFoundError, KeyError, ValueError, json.JSONDecodeError) as err:
        print(f"bad scenario: {err}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    truths = {}
    for i in range(args.count):
        trace, truth = generate_scenario_trace(scenario, index=i, seed=args.seed)
        write_trace(trace, out_dir)
        truths[trace.manifest.trace_id] = {
            "prefill_j": truth.prefill_j,
            "intercept_j": truth.intercept_j,
            "slope_j_per_token": truth.slope_j_per_token,
        }
    _atomic_write(
        out_dir / "ground_truth.json",
        _json_dumps({"format_version": REPORT_VERSION, "scenario": scenario.name,
                     "traces": truths}),
    )
    log.info("wrote %d traces for scenario %s", args.count, scenario.name)
    return 0


# ---------------------------------------------------------------------------
# suppress

def cmd_suppress(args) -> int:
    try:
        tasks = load_corpus(args.corpus)
    except WattlensError as err:
        print(f"corpus error: {err}", file=sys.stderr)
        return 2
    config = SuppressionConfig(
        max_new_tokens=args.budget,
        check_cadence=args.cadence,
        validator_timeout_s=args.timeout,
    )
    try:
        config.validate()
    except ValueError as err:
        print(f"bad suppression config: {err}", file=sys.stderr)
        return 2

    report = evaluate_corpus(tasks, config)

    out_dir = Path(args.out)
    task_rows = [
        {
            "task_id": o.task_id,
            "baseline_tokens": o.baseline_tokens,
            "suppressed_tokens": o.suppressed_tokens,
            "reduction_pct": o.reduction_pct,
            "halt_reason": o.halt_reason,
            "checks_run": o.checks_run,
            "test_runs": o.test_runs,
            "baseline_passed": o.baseline_passed,
            "suppressed_passed": o.suppressed_passed,
        }
        for o in report.tasks
    ]
    _atomic_write(
        out_dir / "suppress_report.json",
        _json_dumps(
            {
                "format_version": REPORT_VERSION,
                "budget": args.budget,
                "cadence": args.cadence,
                "tasks": task_rows,
                "aggregate": {
                    "mean_baseline_tokens": report.mean_baseline_tokens,
                    "mean_suppressed_tokens": report.mean_suppressed_tokens,
                    "reduction_pct": report.reduction_pct,
                    "baseline_pass_rate": report.baseline_pass_rate,
                    "suppressed_pass_rate": report.suppressed_pass_rate,
                    "total_checks_run": report.total_checks_run,
                    "total_test_runs": report.total_test_runs,
                },
            }
        ),
    )
    _atomic_write(
        out_dir / "suppress_timing.json",
        _json_dumps(
            {
                "format_version": REPORT_VERSION,
                "total_check_wall_time_s": report.total_check_wall_time_s,
                "tasks": {
                    o.task_id: {"check_wall_time_s": o.check_wall_time_s}
                    for o in report.tasks
                },
            }
        ),
    )
    header = [
        "task_id", "baseline_tokens", "suppressed_tokens", "reduction_pct",
        "halt_reason", "checks_run", "test_runs", "baseline_passed", "suppressed_passed",
    ]
    rows = [
        [r["task_id"], r["baseline_tokens"], r["suppressed_tokens"],
         _fmt(r["reduction_pct"]), r["halt_reason"], r["checks_run"],
         r["test_runs"], _fmt(r["baseline_passed"]), _fmt(r["suppressed_passed"])]
        for r in task_rows
    ]
    _atomic_write(out_dir / "suppress_report.csv", _csv_text(header, rows))
    log.info(
        "suppression over %d tasks: %.1f%% token reduction",
        len(report.tasks),
        report.reduction_pct,
    )
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wattlens",
        description="Per-token GPU energy accounting for LLM inference.",
    )
    parser.add_argument("--version", action="version", version=f"wattlens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="per-trace energy reports from trace files")
    p.add_argument("manifests", nargs="+", help="trace manifest JSON files")
    p.add_argument("--mode", choices=MODES, default=MODE_SAMPLE_MEAN)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--jobs", type=int, default=4, help="parallel traces")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("aggregate", help="fold per-trace reports into workload summaries")
    p.add_argument("report_dir", help="directory holding *.report.json files")
    p.add_argument("--outliers", choices=OUTLIER_RULES, default=OUTLIER_IQR)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("simulate", help="generate synthetic traces with ground truth")
    p.add_argument("--preset", help=f"named scenario ({', '.join(list_presets())})")
    p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("suppress", help="evaluate babbling suppression over a corpus")
    p.add_argument("corpus", help="corpus JSON file")
    p.add_argument("--budget", type=int, default=300, help="max new tokens")
    p.add_argument("--cadence", default="every-line", help="every-line or every-k=<n>")
    p.add_argument("--timeout", type=float, default=5.0, help="validator timeout (s)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_suppress)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("WATTLENS_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WattlensError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - internal failure path
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
