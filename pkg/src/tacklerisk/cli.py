"""Command-line entry point.

Subcommands:

* ``run``: evaluate one segment file, emit the assessment JSON
* ``eval``: evaluate a corpus directory against a truth CSV, emit metrics
* ``gen``: render scenario specs into a synthetic corpus + truth CSV
* ``track``: dump the ball tracker's per-frame debug data (JSON + CSV)

Exit codes: 0 success, 1 usage or I/O error, 2 pipeline failure (the
failure JSON is still emitted). Every default filter/resolver parameter can
be overridden by flag or by ``--config`` (JSON with "tracker", "resolver",
"head" and "risk" sections), flags winning over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .classify import (RiskConfig, SegmentFailure, assessment_to_dict,
                       failure_to_dict, try_evaluate_segment)
from .errors import PipelineError, TackleRiskError
from .heads import HeadConfig
from .metrics import report, report_to_csv, report_to_json
from .model import load_segment, load_truth_csv
from .roles import ResolverConfig
from .synthgen import load_specs, sweep
from .tracker import TrackerConfig, track_ball, track_to_dict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PIPELINE = 2


@dataclass(frozen=True)
class RunConfig:
    tracker: TrackerConfig
    resolver: ResolverConfig
    head: HeadConfig
    risk: RiskConfig


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for
    # pipeline failures here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="JSON config file (sections: tracker, resolver, head, risk)")
    g = p.add_argument_group("tracker")
    g.add_argument("--meas-std-x", type=float, help="ball measurement std x (px)")
    g.add_argument("--meas-std-y", type=float, help="ball measurement std y (px)")
    g.add_argument("--max-daccel-x", type=float, help="max accel change x (px/s^2)")
    g.add_argument("--max-daccel-y", type=float, help="max accel change y (px/s^2)")
    g.add_argument("--gate-sigma", type=float, help="ball innovation gate (sigmas)")
    g.add_argument("--ball-conf-floor", type=float,
                   help="confidence below which a detection is distrusted")
    g = p.add_argument_group("resolver")
    g.add_argument("--tackle-frame-offset", type=int,
                   help="frames to shift the tackle frame (in [-5, 0])")
    g.add_argument("--min-person-height-frac", type=float,
                   help="ignore persons shorter than this fraction of frame height")
    g = p.add_argument_group("head")
    g.add_argument("--head-meas-std", type=float, help="head measurement std (px)")
    g.add_argument("--head-gate-sigma", type=float, help="head innovation gate (sigmas)")
    g.add_argument("--tail-frames", type=int, help="frames averaged for the carrier head")
    g.add_argument("--head-frac", type=float,
                   help="head-center depth as fraction of bbox height")
    g = p.add_argument_group("risk")
    g.add_argument("--pcts", type=str,
                   help="comma-separated region percentages, e.g. 5,10,15,20,25")
    g.add_argument("--primary-pct", type=float,
                   help="headline region percentage (must be in --pcts)")


_FLAG_FIELDS = {
    "tracker": {"meas_std_x": "meas_std_x", "meas_std_y": "meas_std_y",
                "max_daccel_x": "max_daccel_x", "max_daccel_y": "max_daccel_y",
                "gate_sigma": "gate_sigma", "ball_conf_floor": "conf_floor"},
    "resolver": {"tackle_frame_offset": "tackle_frame_offset",
                 "min_person_height_frac": "min_person_height_frac"},
    "head": {"head_meas_std": "head_meas_std", "head_gate_sigma": "head_gate_sigma",
             "tail_frames": "tail_frames", "head_frac": "head_frac"},
}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError("--config file must contain a JSON object")

    sections: dict[str, dict] = {}
    for section, mapping in _FLAG_FIELDS.items():
        merged = dict(file_cfg.get(section, {}))
        for flag, fieldname in mapping.items():
            value = getattr(args, flag, None)
            if value is not None:
                merged[fieldname] = value
        sections[section] = merged

    risk_kwargs = dict(file_cfg.get("risk", {}))
    if "region_pcts" in risk_kwargs:
        risk_kwargs["region_pcts"] = tuple(risk_kwargs["region_pcts"])
    if getattr(args, "pcts", None) is not None:
        risk_kwargs["region_pcts"] = tuple(
            sorted(float(v) / 100.0 for v in args.pcts.split(",")))
    if getattr(args, "primary_pct", None) is not None:
        risk_kwargs["primary_pct"] = args.primary_pct / 100.0

    return RunConfig(
        tracker=TrackerConfig(**sections["tracker"]),
        resolver=ResolverConfig(**sections["resolver"]),
        head=HeadConfig(**sections["head"]),
        risk=RiskConfig(**risk_kwargs),
    )


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = build_run_config(args)
    seg = load_segment(args.segment)
    result = try_evaluate_segment(seg, cfg.tracker, cfg.resolver, cfg.head, cfg.risk)
    if isinstance(result, SegmentFailure):
        _emit(failure_to_dict(result), args.out)
        print(f"segment {seg.id}: failed ({result.reason}): {result.message}",
              file=sys.stderr)
        return EXIT_PIPELINE
    _emit(assessment_to_dict(result), args.out)
    return EXIT_OK


def _eval_one(task: tuple[str, RunConfig]) -> dict:
    path, cfg = task
    seg = load_segment(path)
    result = try_evaluate_segment(seg, cfg.tracker, cfg.resolver, cfg.head, cfg.risk)
    if isinstance(result, SegmentFailure):
        return failure_to_dict(result)
    return assessment_to_dict(result)


def _result_from_dict(doc: dict):
    # Round-trip through plain dicts keeps worker results picklable and the
    # aggregation order-independent.
    from .heads import HeadEstimate, HeadSource
    from .classify import TackleAssessment
    from .model import RiskLabel

    if doc["status"] == "failed":
        return SegmentFailure(segment_id=doc["segment_id"], reason=doc["reason"],
                              message=doc["message"])
    return TackleAssessment(
        segment_id=doc["segment_id"],
        tackle_frame=doc["tackle_frame"],
        carrier_index=doc["carrier_index"],
        tackler_index=doc["tackler_index"],
        carrier_head=HeadEstimate(doc["carrier_head"]["x"], doc["carrier_head"]["y"],
                                  HeadSource(doc["carrier_head"]["source"])),
        tackler_head=HeadEstimate(doc["tackler_head"]["x"], doc["tackler_head"]["y"],
                                  HeadSource(doc["tackler_head"]["source"])),
        regions={r["pct"]: (r["y_low"], r["y_high"]) for r in doc["regions"]},
        labels={r["pct"]: RiskLabel(r["label"]) for r in doc["regions"]},
        warnings=tuple(doc["warnings"]),
    )


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = build_run_config(args)
    corpus = Path(args.corpus_dir)
    if not corpus.is_dir():
        print(f"error: {corpus} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    paths = sorted(str(p) for p in corpus.glob("*.json"))
    if not paths:
        print(f"error: no segment files (*.json) in {corpus}", file=sys.stderr)
        return EXIT_USAGE
    truth = load_truth_csv(args.truth_csv)

    tasks = [(p, cfg) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            docs = list(pool.map(_eval_one, tasks))
    else:
        docs = [_eval_one(t) for t in tasks]
    results = [_result_from_dict(d) for d in docs]

    for r in results:
        if isinstance(r, SegmentFailure):
            print(f"segment {r.segment_id}: failed ({r.reason})", file=sys.stderr)

    n_total = args.n_total if args.n_total is not None else len(results)
    rep = report(results, truth, cfg.risk, n_total)
    csv_text = report_to_csv(rep)
    print(csv_text, end="")
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "metrics.csv").write_text(csv_text, encoding="utf-8")
        (out_dir / "metrics.json").write_text(report_to_json(rep) + "\n",
                                              encoding="utf-8")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    specs = load_specs(args.spec_file)
    seg_paths, csv_path = sweep(specs, args.out_dir,
                                label_pct=args.label_pct / 100.0)
    print(f"wrote {len(seg_paths)} segments and {csv_path}", file=sys.stderr)
    return EXIT_OK


def _track_csv(dump: dict) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["frame", "measured_x", "measured_y", "filtered_x",
                     "filtered_y", "smoothed_x", "smoothed_y", "accepted"])
    for f in dump["frames"]:
        mx, my = ("", "") if f["measured"] is None else f["measured"]
        writer.writerow([f["index"], mx, my,
                         f["filtered"][0], f["filtered"][1],
                         f["smoothed"][0], f["smoothed"][1],
                         int(f["accepted"])])
    return out.getvalue()


def cmd_track(args: argparse.Namespace) -> int:
    cfg = build_run_config(args)
    seg = load_segment(args.segment)
    try:
        track = track_ball(seg, cfg.tracker)
    except PipelineError as exc:
        _emit({"segment_id": seg.id, "status": "failed", "reason": exc.reason,
               "message": str(exc)}, args.out)
        return EXIT_PIPELINE
    dump = track_to_dict(seg, track)
    _emit(dump, args.out)
    if args.csv:
        Path(args.csv).write_text(_track_csv(dump), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tacklerisk",
                     description="Tackle risk classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("run", help="evaluate one segment file")
    p.add_argument("segment", help="canonical segment JSON file")
    p.add_argument("--out", metavar="FILE", help="write result JSON here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="evaluate a corpus against ground truth")
    p.add_argument("corpus_dir", help="directory of segment JSON files")
    p.add_argument("truth_csv", help="ground-truth CSV (segment_id,label)")
    p.add_argument("--out-dir", metavar="DIR",
                   help="write metrics.csv and metrics.json here")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.add_argument("--n-total", type=int, default=None,
                   help="denominator for total accuracy (default: corpus size)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("spec_file", help="JSON array of scenario specs")
    p.add_argument("out_dir", help="output directory")
    p.add_argument("--label-pct", type=float, default=15.0,
                   help="region percentage used for the truth CSV label")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("track", help="dump per-frame ball tracker debug data")
    p.add_argument("segment", help="canonical segment JSON file")
    p.add_argument("--out", metavar="FILE", help="write dump JSON here")
    p.add_argument("--csv", metavar="FILE", help="also write a plot-ready CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_track)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TackleRiskError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
