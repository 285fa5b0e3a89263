"""Light validator for the canonical segment schema.

The downstream pipeline is the authority on this format; this check runs
before every write so the adapter never emits a document the pipeline would
reject. Kept dependency-free on purpose: the only coupling to the consumer
is the documented JSON shape itself.
"""

from __future__ import annotations

import math

N_KEYPOINTS = 18


class SchemaViolation(ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _check_bbox(bbox, path):
    if not (isinstance(bbox, list) and len(bbox) == 4):
        raise SchemaViolation("bbox must be a 4-number array", path)
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool)
               and math.isfinite(v) for v in bbox):
        raise SchemaViolation("bbox values must be finite numbers", path)
    x0, y0, x1, y1 = bbox
    if min(bbox) < 0 or x0 > x1 or y0 > y1:
        raise SchemaViolation("bbox must satisfy 0 <= min <= max", path)


def validate_segment_doc(doc: dict) -> None:
    """Raise SchemaViolation if ``doc`` is not a valid canonical segment."""
    if not isinstance(doc, dict):
        raise SchemaViolation("document must be a JSON object")
    for key, kind in (("id", str), ("width", int), ("height", int)):
        if not isinstance(doc.get(key), kind) or isinstance(doc.get(key), bool):
            raise SchemaViolation(f"'{key}' must be {kind.__name__}", f"$.{key}")
    fps = doc.get("fps")
    if isinstance(fps, bool) or not isinstance(fps, (int, float)):
        raise SchemaViolation("'fps' must be a number", "$.fps")
    if not (1.0 <= fps <= 240.0):
        raise SchemaViolation(f"fps {fps} outside [1, 240]", "$.fps")
    if doc["width"] <= 0 or doc["height"] <= 0:
        raise SchemaViolation("dimensions must be positive", "$.width")

    frames = doc.get("frames")
    if not isinstance(frames, list) or not frames:
        raise SchemaViolation("'frames' must be a non-empty array", "$.frames")
    prev = -1
    for i, frame in enumerate(frames):
        path = f"$.frames[{i}]"
        if not isinstance(frame, dict):
            raise SchemaViolation("frame must be an object", path)
        idx = frame.get("index")
        if isinstance(idx, bool) or not isinstance(idx, int) or idx <= prev:
            raise SchemaViolation("frame indices must be strictly increasing "
                                  "integers", f"{path}.index")
        prev = idx
        for key in ("balls", "persons"):
            if not isinstance(frame.get(key), list):
                raise SchemaViolation(f"'{key}' must be an array",
                                      f"{path}.{key}")
        for j, ball in enumerate(frame["balls"]):
            bpath = f"{path}.balls[{j}]"
            if not isinstance(ball, dict):
                raise SchemaViolation("ball must be an object", bpath)
            _check_bbox(ball.get("bbox"), f"{bpath}.bbox")
            conf = ball.get("confidence")
            if isinstance(conf, bool) or not isinstance(conf, (int, float)) \
                    or not (0.0 <= conf <= 1.0):
                raise SchemaViolation("confidence must lie in [0, 1]",
                                      f"{bpath}.confidence")
        for j, person in enumerate(frame["persons"]):
            ppath = f"{path}.persons[{j}]"
            if not isinstance(person, dict):
                raise SchemaViolation("person must be an object", ppath)
            _check_bbox(person.get("bbox"), f"{ppath}.bbox")
            kps = person.get("keypoints")
            if kps is None:
                continue
            if not (isinstance(kps, list) and len(kps) == N_KEYPOINTS):
                raise SchemaViolation(f"keypoints must be null or an array of "
                                      f"{N_KEYPOINTS}", f"{ppath}.keypoints")
            for k, kp in enumerate(kps):
                if kp is None:
                    continue
                if not (isinstance(kp, list) and len(kp) == 3
                        and all(isinstance(v, (int, float))
                                and not isinstance(v, bool)
                                and math.isfinite(v) for v in kp)
                        and 0.0 <= kp[2] <= 1.0):
                    raise SchemaViolation("keypoint must be [x, y, score<=1]",
                                          f"{ppath}.keypoints[{k}]")
