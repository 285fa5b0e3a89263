"""Domain types, bbox geometry, and parsing of the canonical segment format.

Canonical segment file (JSON, UTF-8)::

    { "id": str, "width": int, "height": int, "fps": number,
      "frames": [ { "index": int,
                    "balls":   [ {"bbox": [x_min, y_min, x_max, y_max],
                                  "confidence": number} ],
                    "persons": [ {"bbox": [...],
                                  "keypoints": [[x, y, score] or null] x18 } ] } ] }

Ground-truth labels file: CSV with header ``segment_id,label``,
label in {high, low}.

Keypoint entries follow the 18-part body convention (index -> part):
0 nose, 1 neck, 2 right_shoulder, 3 right_elbow, 4 right_wrist,
5 left_shoulder, 6 left_elbow, 7 left_wrist, 8 right_hip, 9 right_knee,
10 right_ankle, 11 left_hip, 12 left_knee, 13 left_ankle, 14 right_eye,
15 left_eye, 16 right_ear, 17 left_ear.

Parsing rejects malformed data instead of repairing it: shape/type problems
raise :class:`SchemaError` (with a JSON path), domain violations raise
:class:`InvariantError`. All types are immutable after construction.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvariantError, SchemaError

N_KEYPOINTS = 18

# Fixed body-part indices (18-part convention).
KP_NOSE = 0
KP_NECK = 1
KP_RIGHT_EYE = 14
KP_LEFT_EYE = 15
KP_RIGHT_EAR = 16
KP_LEFT_EAR = 17

#: Facial keypoints whose mean defines the head-center.
FACE_KEYPOINTS = (KP_NOSE, KP_RIGHT_EYE, KP_LEFT_EYE, KP_RIGHT_EAR, KP_LEFT_EAR)


class ValidationWarning(UserWarning):
    """Non-fatal inconsistency found while validating a document."""


class RiskLabel(enum.Enum):
    HIGH = "high"
    LOW = "low"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in image pixels; y grows downward."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvariantError(f"bbox coordinates must be finite, got {vals}")
        if any(v < 0 for v in vals):
            raise InvariantError(f"bbox coordinates must be >= 0, got {vals}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise InvariantError(f"bbox min exceeds max: {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height


class Keypoint(NamedTuple):
    x: float
    y: float
    score: float


@dataclass(frozen=True)
class KeypointSet:
    """18 optional body-part points; missing parts are None."""

    points: tuple[Keypoint | None, ...]

    def __post_init__(self):
        if len(self.points) != N_KEYPOINTS:
            raise InvariantError(
                f"keypoint set must have {N_KEYPOINTS} entries, got {len(self.points)}"
            )
        for i, p in enumerate(self.points):
            if p is None:
                continue
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise InvariantError(f"keypoint {i} has non-finite coordinates")
            if not (math.isfinite(p.score) and 0.0 <= p.score <= 1.0):
                raise InvariantError(f"keypoint {i} score {p.score} outside [0, 1]")

    def __getitem__(self, index: int) -> Keypoint | None:
        return self.points[index]

    def present(self, indices: tuple[int, ...]) -> list[Keypoint]:
        return [self.points[i] for i in indices if self.points[i] is not None]


@dataclass(frozen=True)
class BallDetection:
    bbox: BBox
    confidence: float

    def __post_init__(self):
        if not (math.isfinite(self.confidence) and 0.0 <= self.confidence <= 1.0):
            raise InvariantError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class PersonDetection:
    bbox: BBox
    keypoints: KeypointSet | None = None


@dataclass(frozen=True)
class FrameRecord:
    index: int
    balls: tuple[BallDetection, ...] = ()
    persons: tuple[PersonDetection, ...] = ()

    def __post_init__(self):
        if self.index < 0:
            raise InvariantError(f"frame index must be >= 0, got {self.index}")


@dataclass(frozen=True)
class Segment:
    """One tackle clip rendered as per-frame detections; the unit of work."""

    id: str
    width: int
    height: int
    fps: float
    frames: tuple[FrameRecord, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvariantError(
                f"segment dimensions must be positive, got {self.width}x{self.height}"
            )
        if not (1.0 <= self.fps <= 240.0):
            raise InvariantError(f"fps {self.fps} outside [1, 240]")
        if not self.frames:
            raise InvariantError("segment must contain at least one frame")
        indices = [f.index for f in self.frames]
        for prev, cur in zip(indices, indices[1:]):
            if cur <= prev:
                raise InvariantError(
                    f"frame indices must be strictly increasing, got {prev} then {cur}"
                )

    @property
    def n_frames(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class GroundTruthLabel:
    segment_id: str
    label: RiskLabel

    def __post_init__(self):
        if not self.segment_id:
            raise InvariantError("segment_id must be non-empty")


# --------------------------------------------------------------------------
# bbox geometry

def bbox_center(b: BBox) -> tuple[float, float]:
    """Midpoint of the box: ((x_min+x_max)/2, (y_min+y_max)/2)."""
    return (b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0


def _intersection_area(a: BBox, b: BBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint or degenerate zero-area boxes."""
    inter = _intersection_area(a, b)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def overlaps(a: BBox, b: BBox) -> bool:
    """True iff the boxes share strictly positive intersection area.

    Touching edges do not count: adjacent boxes must not trigger the
    tackle-frame overlap rule.
    """
    return _intersection_area(a, b) > 0.0


# --------------------------------------------------------------------------
# canonical JSON parsing / serialization

def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing required field '{key}'", path)
    return obj[key]


def _as_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected object, got {type(value).__name__}", path)
    return value


def _as_array(value, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected array, got {type(value).__name__}", path)
    return value


def _as_int(value, path: str) -> int:
    # bool is an int subclass; a bare True here is a schema bug, not a count.
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"expected integer, got {type(value).__name__}", path)
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected number, got {type(value).__name__}", path)
    return float(value)


def _as_string(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"expected string, got {type(value).__name__}", path)
    return value


def _parse_bbox(value, path: str) -> BBox:
    arr = _as_array(value, path)
    if len(arr) != 4:
        raise SchemaError(f"bbox must have 4 numbers, got {len(arr)}", path)
    x0, y0, x1, y1 = (_as_number(v, f"{path}[{i}]") for i, v in enumerate(arr))
    return BBox(x0, y0, x1, y1)


def _parse_keypoints(value, path: str) -> KeypointSet | None:
    if value is None:
        return None
    arr = _as_array(value, path)
    if len(arr) != N_KEYPOINTS:
        raise SchemaError(f"keypoints must have {N_KEYPOINTS} entries, got {len(arr)}", path)
    points: list[Keypoint | None] = []
    for i, entry in enumerate(arr):
        if entry is None:
            points.append(None)
            continue
        triplet = _as_array(entry, f"{path}[{i}]")
        if len(triplet) != 3:
            raise SchemaError(f"keypoint must be [x, y, score], got {len(triplet)} values",
                              f"{path}[{i}]")
        x, y, s = (_as_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(triplet))
        points.append(Keypoint(x, y, s))
    return KeypointSet(tuple(points))


def _parse_person(value, path: str) -> PersonDetection:
    obj = _as_object(value, path)
    bbox = _parse_bbox(_require(obj, "bbox", path), f"{path}.bbox")
    keypoints = _parse_keypoints(obj.get("keypoints"), f"{path}.keypoints")
    person = PersonDetection(bbox=bbox, keypoints=keypoints)
    if keypoints is not None:
        _warn_if_points_outside(person, path)
    return person


def _warn_if_points_outside(person: PersonDetection, path: str) -> None:
    # Points slightly outside the box are common with loose detectors; a 10%
    # inflation is tolerated silently, anything past that is flagged.
    b = person.bbox
    mx, my = 0.10 * b.width, 0.10 * b.height
    for i, p in enumerate(person.keypoints.points):
        if p is None:
            continue
        if not (b.x_min - mx <= p.x <= b.x_max + mx and b.y_min - my <= p.y <= b.y_max + my):
            warnings.warn(
                f"{path}.keypoints[{i}] at ({p.x:.1f}, {p.y:.1f}) lies outside "
                f"the person bbox inflated by 10%",
                ValidationWarning,
                stacklevel=2,
            )


def _parse_ball(value, path: str) -> BallDetection:
    obj = _as_object(value, path)
    bbox = _parse_bbox(_require(obj, "bbox", path), f"{path}.bbox")
    conf = _as_number(_require(obj, "confidence", path), f"{path}.confidence")
    return BallDetection(bbox=bbox, confidence=conf)


def _parse_frame(value, path: str) -> FrameRecord:
    obj = _as_object(value, path)
    index = _as_int(_require(obj, "index", path), f"{path}.index")
    balls = tuple(
        _parse_ball(b, f"{path}.balls[{i}]")
        for i, b in enumerate(_as_array(_require(obj, "balls", path), f"{path}.balls"))
    )
    persons = tuple(
        _parse_person(p, f"{path}.persons[{i}]")
        for i, p in enumerate(_as_array(_require(obj, "persons", path), f"{path}.persons"))
    )
    return FrameRecord(index=index, balls=balls, persons=persons)


def parse_segment(raw: bytes | str) -> Segment:
    """Parse and fully validate a canonical segment document.

    Raises SchemaError for shape/type problems (with the offending JSON
    path) and InvariantError for domain violations such as non-monotone
    frame indices. Never repairs malformed input.
    """
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"document is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document is not valid JSON: {exc}") from exc

    obj = _as_object(doc, "$")
    seg_id = _as_string(_require(obj, "id", "$"), "$.id")
    width = _as_int(_require(obj, "width", "$"), "$.width")
    height = _as_int(_require(obj, "height", "$"), "$.height")
    fps = _as_number(_require(obj, "fps", "$"), "$.fps")
    frames_raw = _as_array(_require(obj, "frames", "$"), "$.frames")
    frames = tuple(
        _parse_frame(f, f"$.frames[{i}]") for i, f in enumerate(frames_raw)
    )
    return Segment(id=seg_id, width=width, height=height, fps=fps, frames=frames)


def segment_to_dict(seg: Segment) -> dict:
    """Plain-dict form of a segment, matching the canonical schema."""
    return {
        "id": seg.id,
        "width": seg.width,
        "height": seg.height,
        "fps": seg.fps,
        "frames": [
            {
                "index": f.index,
                "balls": [
                    {
                        "bbox": [b.bbox.x_min, b.bbox.y_min, b.bbox.x_max, b.bbox.y_max],
                        "confidence": b.confidence,
                    }
                    for b in f.balls
                ],
                "persons": [
                    {
                        "bbox": [p.bbox.x_min, p.bbox.y_min, p.bbox.x_max, p.bbox.y_max],
                        "keypoints": None if p.keypoints is None else [
                            None if kp is None else [kp.x, kp.y, kp.score]
                            for kp in p.keypoints.points
                        ],
                    }
                    for p in f.persons
                ],
            }
            for f in seg.frames
        ],
    }


def serialize_segment(seg: Segment) -> str:
    """Canonical JSON text; ``parse_segment`` round-trips it exactly."""
    return json.dumps(segment_to_dict(seg))


def load_segment(path) -> Segment:
    with open(path, "rb") as fh:
        return parse_segment(fh.read())


# --------------------------------------------------------------------------
# ground-truth labels

def parse_truth_csv(text: str) -> list[GroundTruthLabel]:
    """Parse the ground-truth CSV (header ``segment_id,label``)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("truth CSV is empty") from None
    if [h.strip() for h in header] != ["segment_id", "label"]:
        raise SchemaError(f"truth CSV header must be 'segment_id,label', got {header!r}")
    labels: list[GroundTruthLabel] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise SchemaError(f"truth CSV line {lineno}: expected 2 columns, got {len(row)}")
        seg_id, label_text = row[0].strip(), row[1].strip().lower()
        if label_text not in ("high", "low"):
            raise SchemaError(f"truth CSV line {lineno}: label must be 'high' or 'low', "
                              f"got {label_text!r}")
        if seg_id in seen:
            raise InvariantError(f"duplicate segment id {seg_id!r} in truth CSV")
        seen.add(seg_id)
        labels.append(GroundTruthLabel(segment_id=seg_id, label=RiskLabel(label_text)))
    return labels


def load_truth_csv(path) -> list[GroundTruthLabel]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_truth_csv(fh.read())


def truth_to_csv(labels: list[GroundTruthLabel]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["segment_id", "label"])
    for gt in labels:
        writer.writerow([gt.segment_id, gt.label.value])
    return out.getvalue()
