"""Decode a clip, run the detection backends, and emit the segment JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from .detectors import (BrightBlobBallDetector, ColorKeyPersonDetector,
                        MotionPersonDetector, NullPoseEstimator,
                        TorchvisionKeypointBackend)
from .schema import validate_segment_doc

BALL_MODELS = ("bright-blob",)
PERSON_MODELS = ("motion", "team-color")
POSE_MODELS = ("none", "torchvision")


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtractorConfig:
    video: str
    out: str
    segment_id: str | None = None
    ball_model: str = "bright-blob"
    person_model: str = "motion"
    pose_model: str = "none"
    pose_weights: str | None = None
    ball_conf_floor: float = 0.0   # emit everything; the pipeline gates
    frame_start: int = 0
    frame_end: int | None = None   # exclusive; None = to the last frame
    ball_threshold: int = 200

    def __post_init__(self):
        if self.ball_model not in BALL_MODELS:
            raise ValueError(f"unknown ball model {self.ball_model!r}; "
                             f"choose from {BALL_MODELS}")
        if self.person_model not in PERSON_MODELS:
            raise ValueError(f"unknown person model {self.person_model!r}; "
                             f"choose from {PERSON_MODELS}")
        if self.pose_model not in POSE_MODELS:
            raise ValueError(f"unknown pose model {self.pose_model!r}; "
                             f"choose from {POSE_MODELS}")
        if self.frame_start < 0:
            raise ValueError("frame_start must be >= 0")
        if self.frame_end is not None and self.frame_end <= self.frame_start:
            raise ValueError("frame_end must exceed frame_start")
        if not (0.0 <= self.ball_conf_floor <= 1.0):
            raise ValueError("ball_conf_floor must lie in [0, 1]")


def decode_frames(cfg: ExtractorConfig) -> tuple[list[np.ndarray], float]:
    cap = cv2.VideoCapture(cfg.video)
    if not cap.isOpened():
        raise ExtractionError(f"cannot open video {cfg.video!r}")
    fps = cap.get(cv2.CAP_PROP_FPS)
    if not fps or fps <= 0:
        fps = 30.0   # container did not report a rate
    frames: list[np.ndarray] = []
    pos = 0
    while True:
        ok, frame = cap.read()
        if not ok:
            break
        if pos >= cfg.frame_start and (cfg.frame_end is None
                                       or pos < cfg.frame_end):
            frames.append(frame)
        pos += 1
        if cfg.frame_end is not None and pos >= cfg.frame_end:
            break
    cap.release()
    if not frames:
        raise ExtractionError(
            f"no decodable frames in {cfg.video!r} "
            f"(range {cfg.frame_start}..{cfg.frame_end})")
    return frames, float(fps)


def extract(cfg: ExtractorConfig) -> dict:
    """Run the full adapter; returns the document it wrote to ``cfg.out``."""
    frames, fps = decode_frames(cfg)
    height, width = frames[0].shape[:2]

    ball_detector = BrightBlobBallDetector(threshold=cfg.ball_threshold)
    balls_per_frame = ball_detector.detect(frames)

    if cfg.pose_model == "torchvision":
        # the pose network also supplies the person boxes
        backend = TorchvisionKeypointBackend(weights_path=cfg.pose_weights)
        persons_per_frame, poses_per_frame = backend.detect_with_poses(frames)
    else:
        if cfg.person_model == "team-color":
            person_detector = ColorKeyPersonDetector()
        else:
            person_detector = MotionPersonDetector()
        persons_per_frame = person_detector.detect(frames)
        poses_per_frame = NullPoseEstimator().estimate(frames, persons_per_frame)

    doc = {
        "id": cfg.segment_id or Path(cfg.video).stem,
        "width": int(width),
        "height": int(height),
        "fps": float(min(max(fps, 1.0), 240.0)),
        "frames": [
            {
                # dense zero-based indices regardless of container timestamps
                "index": i,
                "balls": [
                    {"bbox": list(bbox), "confidence": conf}
                    for bbox, conf in balls_per_frame[i]
                    if conf >= cfg.ball_conf_floor
                ],
                "persons": [
                    {"bbox": list(bbox), "keypoints": poses_per_frame[i][j]}
                    for j, bbox in enumerate(persons_per_frame[i])
                ],
            }
            for i in range(len(frames))
        ],
    }
    validate_segment_doc(doc)
    Path(cfg.out).write_text(json.dumps(doc), encoding="utf-8")
    return doc
