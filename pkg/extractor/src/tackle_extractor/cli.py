"""``tackle-extract``: video clip in, canonical segment JSON out."""

from __future__ import annotations

import argparse
import sys

from .extract import (BALL_MODELS, PERSON_MODELS, POSE_MODELS,
                      ExtractionError, ExtractorConfig, extract)
from .schema import SchemaViolation


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tackle-extract",
        description="Run detection models over a clip and write the "
                    "canonical segment JSON")
    p.add_argument("--video", required=True, help="input video file")
    p.add_argument("--out", required=True, help="output segment JSON path")
    p.add_argument("--id", dest="segment_id",
                   help="segment id (default: video stem)")
    p.add_argument("--ball-model", default="bright-blob", choices=BALL_MODELS)
    p.add_argument("--person-model", default="motion", choices=PERSON_MODELS,
                   help="'team-color' keeps contacting players separate by "
                        "kit color; ignored with --pose-model torchvision")
    p.add_argument("--pose-model", default="none", choices=POSE_MODELS,
                   help="'torchvision' also supplies the person boxes")
    p.add_argument("--pose-weights", help="local checkpoint for the pose model")
    p.add_argument("--ball-conf-floor", type=float, default=0.0,
                   help="drop ball detections below this confidence "
                        "(default 0: emit everything)")
    p.add_argument("--ball-threshold", type=int, default=200,
                   help="brightness threshold for the blob ball detector")
    p.add_argument("--frame-start", type=int, default=0)
    p.add_argument("--frame-end", type=int, default=None,
                   help="exclusive end frame (default: whole clip)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExtractorConfig(
            video=args.video, out=args.out, segment_id=args.segment_id,
            ball_model=args.ball_model, person_model=args.person_model,
            pose_model=args.pose_model,
            pose_weights=args.pose_weights,
            ball_conf_floor=args.ball_conf_floor,
            ball_threshold=args.ball_threshold,
            frame_start=args.frame_start, frame_end=args.frame_end)
        doc = extract(cfg)
    except (ExtractionError, SchemaViolation, ValueError, OSError,
            RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}: {len(doc['frames'])} frames at "
          f"{doc['fps']:g} fps ({doc['width']}x{doc['height']})",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
