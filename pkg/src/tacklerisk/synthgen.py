"""Deterministic generator of synthetic tackle segments with known truth.

Scenarios are built from a small kinematic model: every actor is a box of
fixed body height moving with constant acceleration, the ball rides at the
carrier's chest, and keypoints come from a stick-figure layout whose five
facial points average exactly to the head-center (placed ``head_frac`` of
the body height below the bbox top). The tackler's vertical placement is
anchored to the carrier: its head sits ``tackler_head_offset_frac`` body
heights below the carrier's head, which pins the true risk label; the
tackler's own ``start_y/vel_y/accel_y`` act as deltas on top of that anchor.

Detection noise is Gaussian on the ball's bbox center, calibrated by
default to measured detector error statistics (std 2.65/3.46 px, mean
-0.43/-0.09 px). Outlier frames replace the ball detection with a displaced
copy. Everything is driven by one seeded PCG64 generator, so a spec always
produces byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .classify import DEFAULT_REGION_PCTS
from .errors import TackleRiskError
from .model import (BBox, BallDetection, FrameRecord, GroundTruthLabel,
                    Keypoint, KeypointSet, N_KEYPOINTS, PersonDetection,
                    RiskLabel, Segment, overlaps, serialize_segment,
                    truth_to_csv)

#: Ball rides at this fraction of the carrier bbox height (chest level).
CHEST_FRAC = 0.30

#: Persons below this fraction of the frame height do not count as tackle
#: contact in the ground truth (mirrors the resolver's default filter).
TRUTH_MIN_HEIGHT_FRAC = 0.14

# Stick-figure layout: (keypoint index, x offset, y offset), offsets as
# fractions of body height. Facial points are relative to the head-center
# and average to it exactly; body points are relative to (center_x, top).
_FACE_LAYOUT = (
    (0, 0.000, 0.010),    # nose
    (14, 0.018, -0.005),  # right eye
    (15, -0.018, -0.005), # left eye
    (16, 0.035, 0.000),   # right ear
    (17, -0.035, 0.000),  # left ear
)
_BODY_LAYOUT = (
    (1, 0.000, 0.155),    # neck
    (2, 0.095, 0.165), (5, -0.095, 0.165),   # shoulders
    (3, 0.115, 0.300), (6, -0.115, 0.300),   # elbows
    (4, 0.125, 0.430), (7, -0.125, 0.430),   # wrists
    (8, 0.060, 0.530), (11, -0.060, 0.530),  # hips
    (9, 0.055, 0.750), (12, -0.055, 0.750),  # knees
    (10, 0.050, 0.960), (13, -0.050, 0.960), # ankles
)
_KEYPOINT_SCORE = 0.9


class GeometryError(TackleRiskError):
    """The configured trajectories never bring any box into contact."""


class DuplicateId(TackleRiskError):
    """Two scenario specs share a segment id."""


@dataclass(frozen=True)
class ActorSpec:
    """One person's trajectory: bbox center start, velocity, acceleration.

    Units are pixels, pixels/s and pixels/s^2. For the tackler the vertical
    parameters are deltas relative to the head-offset anchor (see module
    docstring); everyone else moves in absolute image coordinates.
    """

    start_x: float
    start_y: float = 0.0
    vel_x: float = 0.0
    vel_y: float = 0.0
    accel_x: float = 0.0
    accel_y: float = 0.0
    body_height: float = 280.0
    width_frac: float = 0.35

    def center_at(self, t: float) -> tuple[float, float]:
        return (self.start_x + self.vel_x * t + 0.5 * self.accel_x * t * t,
                self.start_y + self.vel_y * t + 0.5 * self.accel_y * t * t)


@dataclass(frozen=True)
class OutlierSpec:
    """Displace the ball detection of one frame (a detector mislabel)."""

    frame: int
    dx: float
    dy: float
    confidence: float = 0.9


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    seed: int
    carrier: ActorSpec
    tackler: ActorSpec
    n_frames: int = 60
    fps: float = 30.0
    width: int = 1280
    height: int = 720
    spectators: tuple[ActorSpec, ...] = ()
    tackler_head_offset_frac: float = 0.0
    head_frac: float = 0.075
    ball_radius: float = 12.0
    ball_confidence: float = 0.9
    noise_mean: tuple[float, float] = (-0.43, -0.09)
    noise_std: tuple[float, float] = (2.65, 3.46)
    keypoint_jitter_std: float = 0.0
    emit_keypoints: bool = True
    outliers: tuple[OutlierSpec, ...] = ()
    ball_drop_frames: tuple[int, ...] = ()
    allow_no_contact: bool = False
    region_pcts: tuple[float, ...] = DEFAULT_REGION_PCTS

    def __post_init__(self):
        if self.n_frames < 3:
            raise ValueError("n_frames must be >= 3")
        if not self.id:
            raise ValueError("scenario id must be non-empty")


@dataclass(frozen=True, eq=False)
class ScenarioTruth:
    """Ground truth backing a generated segment."""

    ball: np.ndarray           # (n, 2) true ball centers
    carrier_head: np.ndarray   # (n, 2)
    tackler_head: np.ndarray   # (n, 2)
    tackle_frame: int | None
    labels: dict[float, RiskLabel]
    carrier_height: float


def _bbox_from_center(cx: float, cy: float, w: float, h: float) -> BBox:
    return BBox(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)


def _stick_figure(cx: float, top: float, h: float, head_frac: float,
                  jitter: np.ndarray) -> KeypointSet:
    head_y = top + head_frac * h
    points: list[Keypoint | None] = [None] * N_KEYPOINTS
    for j, (idx, ox, oy) in enumerate(_FACE_LAYOUT):
        points[idx] = Keypoint(cx + ox * h + jitter[j, 0],
                               head_y + oy * h + jitter[j, 1],
                               _KEYPOINT_SCORE)
    n_face = len(_FACE_LAYOUT)
    for j, (idx, ox, oy) in enumerate(_BODY_LAYOUT):
        points[idx] = Keypoint(cx + ox * h + jitter[n_face + j, 0],
                               top + oy * h + jitter[n_face + j, 1],
                               _KEYPOINT_SCORE)
    return KeypointSet(tuple(points))


def gen_segment(spec: ScenarioSpec) -> tuple[Segment, ScenarioTruth]:
    """Render one scenario to a canonical segment plus its ground truth."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_frames
    dt_ts = np.arange(n) / spec.fps

    carrier_h = spec.carrier.body_height
    tackler_h = spec.tackler.body_height
    outliers = {o.frame: o for o in spec.outliers}
    drop = set(spec.ball_drop_frames)

    true_ball = np.zeros((n, 2))
    true_carrier_head = np.zeros((n, 2))
    true_tackler_head = np.zeros((n, 2))
    frames: list[FrameRecord] = []
    overlap_frames: list[int] = []
    truth_min_h = TRUTH_MIN_HEIGHT_FRAC * spec.height

    for k in range(n):
        t = float(dt_ts[k])

        ccx, ccy = spec.carrier.center_at(t)
        carrier_box = _bbox_from_center(ccx, ccy,
                                        spec.carrier.width_frac * carrier_h,
                                        carrier_h)
        carrier_head_y = carrier_box.y_min + spec.head_frac * carrier_h
        true_carrier_head[k] = (ccx, carrier_head_y)
        true_ball[k] = (ccx, carrier_box.y_min + CHEST_FRAC * carrier_h)

        tcx, extra_y = spec.tackler.center_at(t)
        tackler_head_y = (carrier_head_y
                          + spec.tackler_head_offset_frac * carrier_h
                          + extra_y)
        tackler_top = tackler_head_y - spec.head_frac * tackler_h
        tackler_box = BBox(tcx - spec.tackler.width_frac * tackler_h / 2.0,
                           tackler_top,
                           tcx + spec.tackler.width_frac * tackler_h / 2.0,
                           tackler_top + tackler_h)
        true_tackler_head[k] = (tcx, tackler_head_y)

        spectator_boxes = []
        for s in spec.spectators:
            scx, scy = s.center_at(t)
            spectator_boxes.append(
                _bbox_from_center(scx, scy, s.width_frac * s.body_height,
                                  s.body_height))

        contact_boxes = [b for b in [tackler_box] + spectator_boxes
                         if b.height >= truth_min_h]
        if any(overlaps(b, carrier_box) for b in contact_boxes):
            overlap_frames.append(k)

        # Detections. RNG order is fixed: ball noise first, then keypoint
        # jitter per person, so a spec always replays the same stream.
        noise = rng.normal(spec.noise_mean, spec.noise_std)
        balls: list[BallDetection] = []
        if k not in drop:
            bx, by = true_ball[k] + noise
            conf = spec.ball_confidence
            if k in outliers:
                bx += outliers[k].dx
                by += outliers[k].dy
                conf = outliers[k].confidence
            balls.append(BallDetection(
                bbox=BBox(max(0.0, bx - spec.ball_radius),
                          max(0.0, by - spec.ball_radius),
                          bx + spec.ball_radius, by + spec.ball_radius),
                confidence=conf,
            ))

        persons: list[PersonDetection] = []
        for box, h in ([(carrier_box, carrier_h), (tackler_box, tackler_h)]
                       + [(b, s.body_height)
                          for b, s in zip(spectator_boxes, spec.spectators)]):
            jitter = rng.normal(0.0, spec.keypoint_jitter_std,
                                size=(N_KEYPOINTS, 2))
            kp = None
            if spec.emit_keypoints:
                kp = _stick_figure((box.x_min + box.x_max) / 2.0, box.y_min,
                                   h, spec.head_frac, jitter)
            persons.append(PersonDetection(bbox=box, keypoints=kp))

        frames.append(FrameRecord(index=k, balls=tuple(balls),
                                  persons=tuple(persons)))

    tackle_frame = overlap_frames[-1] if overlap_frames else None
    if tackle_frame is None and not spec.allow_no_contact:
        raise GeometryError(
            f"scenario {spec.id!r}: trajectories never produce a bbox overlap"
        )

    labels: dict[float, RiskLabel] = {}
    if tackle_frame is not None:
        dy = abs(true_tackler_head[tackle_frame, 1]
                 - true_carrier_head[tackle_frame, 1])
        for pct in spec.region_pcts:
            labels[pct] = (RiskLabel.HIGH if dy <= pct * carrier_h
                           else RiskLabel.LOW)

    seg = Segment(id=spec.id, width=spec.width, height=spec.height,
                  fps=spec.fps, frames=tuple(frames))
    truth = ScenarioTruth(ball=true_ball, carrier_head=true_carrier_head,
                          tackler_head=true_tackler_head,
                          tackle_frame=tackle_frame, labels=labels,
                          carrier_height=carrier_h)
    return seg, truth


def sweep(specs: list[ScenarioSpec], out_dir,
          label_pct: float = 0.15) -> tuple[list[Path], Path]:
    """Write one segment file per spec plus the ground-truth CSV.

    Returns the segment paths and the CSV path. The CSV label is the truth
    at ``label_pct``.
    """
    if not specs:
        raise ValueError("sweep requires at least one scenario spec")
    seen: set[str] = set()
    for spec in specs:
        if spec.id in seen:
            raise DuplicateId(f"duplicate scenario id {spec.id!r}")
        seen.add(spec.id)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seg_paths: list[Path] = []
    truth_rows: list[GroundTruthLabel] = []
    for spec in specs:
        seg, truth = gen_segment(spec)
        if label_pct not in truth.labels:
            raise ValueError(f"scenario {spec.id!r} has no truth label at "
                             f"pct {label_pct}")
        path = out_dir / f"{spec.id}.json"
        path.write_text(serialize_segment(seg), encoding="utf-8")
        seg_paths.append(path)
        truth_rows.append(GroundTruthLabel(segment_id=spec.id,
                                           label=truth.labels[label_pct]))
    csv_path = out_dir / "truth.csv"
    csv_path.write_text(truth_to_csv(truth_rows), encoding="utf-8")
    return seg_paths, csv_path


# --------------------------------------------------------------------------
# spec (de)serialization for the CLI `gen` command

def spec_to_dict(spec: ScenarioSpec) -> dict:
    return asdict(spec)


def _actor_from_dict(d: dict) -> ActorSpec:
    return ActorSpec(**d)


def spec_from_dict(d: dict) -> ScenarioSpec:
    try:
        d = dict(d)
        d["carrier"] = _actor_from_dict(d["carrier"])
        d["tackler"] = _actor_from_dict(d["tackler"])
        d["spectators"] = tuple(_actor_from_dict(s) for s in d.get("spectators", ()))
        d["outliers"] = tuple(OutlierSpec(**o) for o in d.get("outliers", ()))
        for key in ("noise_mean", "noise_std", "ball_drop_frames", "region_pcts"):
            if key in d:
                d[key] = tuple(d[key])
        return ScenarioSpec(**d)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario spec "
                         f"(id={d.get('id', '?')!r}): {exc}") from exc


def load_specs(path) -> list[ScenarioSpec]:
    """Read a JSON array of scenario specs."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise ValueError("scenario spec file must contain a JSON array")
    return [spec_from_dict(d) for d in doc]
