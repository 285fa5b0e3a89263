"""Detection backends.

Every backend works on the full decoded clip at once (this is an offline
adapter, so two-pass algorithms are fair game). Three roles:

* ball detection: per-frame ``[(bbox, confidence), ...]``
* person detection: per-frame ``[bbox, ...]``
* pose estimation: per-frame ``[keypoints-or-None, ...]`` aligned with the
  person boxes, each keypoints entry an 18-slot list in the canonical
  body-part order

The default backends are classical and fully self-contained: a brightness/
circularity blob detector for the ball and two-pass MOG2 motion segmentation
for players. The ``torchvision`` backend runs a pretrained Keypoint R-CNN
for persons and 18-part poses; it needs its weights available locally and is
selected explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

BBoxT = tuple[float, float, float, float]

# canonical 18-part order: nose, neck, r-shoulder, r-elbow, r-wrist,
# l-shoulder, l-elbow, l-wrist, r-hip, r-knee, r-ankle, l-hip, l-knee,
# l-ankle, r-eye, l-eye, r-ear, l-ear
N_KEYPOINTS = 18

# COCO-17 index (torchvision order) -> canonical 18-part index. The neck
# (canonical 1) has no COCO counterpart and is synthesized from the
# shoulder midpoint.
COCO17_TO_CANONICAL = {
    0: 0,    # nose
    1: 15,   # left eye
    2: 14,   # right eye
    3: 17,   # left ear
    4: 16,   # right ear
    5: 5,    # left shoulder
    6: 2,    # right shoulder
    7: 6,    # left elbow
    8: 3,    # right elbow
    9: 7,    # left wrist
    10: 4,   # right wrist
    11: 11,  # left hip
    12: 8,   # right hip
    13: 12,  # left knee
    14: 9,   # right knee
    15: 13,  # left ankle
    16: 10,  # right ankle
}


def _clamp_box(x0, y0, x1, y1, width, height) -> BBoxT:
    x0 = float(max(0.0, min(x0, width)))
    y0 = float(max(0.0, min(y0, height)))
    x1 = float(max(x0, min(x1, width)))
    y1 = float(max(y0, min(y1, height)))
    return (x0, y0, x1, y1)


@dataclass(frozen=True)
class BrightBlobBallDetector:
    """Bright, roughly circular blobs; confidence is the contour circularity.

    Circularity 4*pi*A/P^2 is 1 for a perfect disc and falls toward 0 for
    ragged shapes, which maps naturally onto the schema's [0, 1] confidence.
    """

    threshold: int = 200
    min_area: float = 12.0
    max_area_frac: float = 0.01   # of the frame area

    def detect(self, frames: list[np.ndarray]) -> list[list[tuple[BBoxT, float]]]:
        out = []
        for frame in frames:
            h, w = frame.shape[:2]
            gray = cv2.cvtColor(frame, cv2.COLOR_BGR2GRAY)
            _, mask = cv2.threshold(gray, self.threshold, 255, cv2.THRESH_BINARY)
            contours, _ = cv2.findContours(mask, cv2.RETR_EXTERNAL,
                                           cv2.CHAIN_APPROX_SIMPLE)
            detections = []
            for c in contours:
                area = cv2.contourArea(c)
                if area < self.min_area or area > self.max_area_frac * w * h:
                    continue
                perimeter = cv2.arcLength(c, closed=True)
                if perimeter <= 0:
                    continue
                circularity = min(1.0, 4.0 * np.pi * area / perimeter ** 2)
                x, y, bw, bh = cv2.boundingRect(c)
                detections.append((_clamp_box(x, y, x + bw, y + bh, w, h),
                                   float(circularity)))
            out.append(detections)
        return out


@dataclass(frozen=True)
class MotionPersonDetector:
    """Player boxes from median-background differencing.

    Offline plus a (near-)static camera means the per-pixel median over
    sampled frames is a clean plate even when players move slowly; each
    frame's foreground is whatever differs from it. Components are filtered
    to person-like sizes and aspect ratios. Overlapping players merge into
    one component, exactly like occlusion does for a learned detector.
    """

    diff_threshold: int = 35
    min_height_frac: float = 0.08    # of the frame height
    max_height_frac: float = 0.95
    min_aspect: float = 1.1          # height / width
    background_samples: int = 24

    def detect(self, frames: list[np.ndarray]) -> list[list[BBoxT]]:
        step = max(1, len(frames) // self.background_samples)
        background = np.median(np.stack(frames[::step]), axis=0).astype(np.uint8)
        kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (7, 7))
        out = []
        for frame in frames:
            h, w = frame.shape[:2]
            diff = cv2.absdiff(frame, background).max(axis=2)
            mask = (diff > self.diff_threshold).astype(np.uint8) * 255
            mask = cv2.morphologyEx(mask, cv2.MORPH_CLOSE, kernel)
            mask = cv2.morphologyEx(mask, cv2.MORPH_OPEN, kernel)
            n, _, stats, _ = cv2.connectedComponentsWithStats(mask)
            boxes = []
            for i in range(1, n):
                x, y, bw, bh, _area = stats[i]
                if bh < self.min_height_frac * h or bh > self.max_height_frac * h:
                    continue
                if bw <= 0 or bh / bw < self.min_aspect:
                    continue
                boxes.append(_clamp_box(x, y, x + bw, y + bh, w, h))
            boxes.sort(key=lambda b: b[0])
            out.append(boxes)
        return out


@dataclass(frozen=True)
class ColorKeyPersonDetector:
    """Player boxes from kit-color segmentation.

    Each team is a set of HSV hue ranges (red needs two, straddling the
    wrap-around). Because the two teams segment independently, players stay
    separate components even while their boxes overlap at contact, which is
    exactly the frame the downstream pipeline cares about.
    """

    teams: tuple[tuple[tuple[int, int], ...], ...] = (
        ((0, 12), (168, 179)),   # red kit
        ((100, 130),),           # blue kit
    )
    sat_min: int = 60
    val_min: int = 40
    min_height_frac: float = 0.08
    max_height_frac: float = 0.95
    min_aspect: float = 1.1

    def detect(self, frames: list[np.ndarray]) -> list[list[BBoxT]]:
        kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (7, 7))
        out = []
        for frame in frames:
            h, w = frame.shape[:2]
            hsv = cv2.cvtColor(frame, cv2.COLOR_BGR2HSV)
            boxes = []
            for team in self.teams:
                mask = np.zeros(frame.shape[:2], np.uint8)
                for lo, hi in team:
                    mask |= cv2.inRange(hsv, (lo, self.sat_min, self.val_min),
                                        (hi, 255, 255))
                mask = cv2.morphologyEx(mask, cv2.MORPH_CLOSE, kernel)
                mask = cv2.morphologyEx(mask, cv2.MORPH_OPEN, kernel)
                n, _, stats, _ = cv2.connectedComponentsWithStats(mask)
                for i in range(1, n):
                    x, y, bw, bh, _area = stats[i]
                    if bh < self.min_height_frac * h or bh > self.max_height_frac * h:
                        continue
                    if bw <= 0 or bh / bw < self.min_aspect:
                        continue
                    boxes.append(_clamp_box(x, y, x + bw, y + bh, w, h))
            boxes.sort(key=lambda b: b[0])
            out.append(boxes)
        return out


class NullPoseEstimator:
    """Emits no keypoints; downstream geometry fallbacks take over."""

    def estimate(self, frames, person_boxes):
        return [[None] * len(boxes) for boxes in person_boxes]


class TorchvisionKeypointBackend:
    """Pretrained Keypoint R-CNN: person boxes and 18-part keypoints.

    Requires torchvision and its COCO weights (downloaded on first use or
    provided via a local checkpoint); import and model load are deferred so
    the classical backends stay usable on machines without torch.
    """

    def __init__(self, score_floor: float = 0.5, weights_path: str | None = None):
        try:
            import torch
            from torchvision.models.detection import (
                KeypointRCNN_ResNet50_FPN_Weights, keypointrcnn_resnet50_fpn)
        except ImportError as exc:
            raise RuntimeError(
                "the torchvision pose backend needs torch and torchvision "
                "installed") from exc
        self._torch = torch
        if weights_path:
            model = keypointrcnn_resnet50_fpn(weights=None)
            model.load_state_dict(torch.load(weights_path, map_location="cpu"))
        else:
            model = keypointrcnn_resnet50_fpn(
                weights=KeypointRCNN_ResNet50_FPN_Weights.DEFAULT)
        self._model = model.eval()
        self.score_floor = score_floor

    def detect_with_poses(self, frames):
        """Per-frame (person boxes, keypoints) from one forward pass each."""
        torch = self._torch
        boxes_out, poses_out = [], []
        with torch.no_grad():
            for frame in frames:
                rgb = cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
                tensor = torch.from_numpy(rgb).permute(2, 0, 1).float() / 255.0
                pred = self._model([tensor])[0]
                h, w = frame.shape[:2]
                boxes, poses = [], []
                for box, score, kps, kp_scores in zip(
                        pred["boxes"], pred["scores"], pred["keypoints"],
                        pred["keypoints_scores"]):
                    if float(score) < self.score_floor:
                        continue
                    x0, y0, x1, y1 = (float(v) for v in box)
                    boxes.append(_clamp_box(x0, y0, x1, y1, w, h))
                    poses.append(self._to_canonical(kps, kp_scores))
                boxes_out.append(boxes)
                poses_out.append(poses)
        return boxes_out, poses_out

    @staticmethod
    def _to_canonical(kps, kp_scores):
        entries: list[list[float] | None] = [None] * N_KEYPOINTS
        for coco_idx, canon_idx in COCO17_TO_CANONICAL.items():
            x, y, vis = (float(v) for v in kps[coco_idx])
            score = 1.0 / (1.0 + float(np.exp(-float(kp_scores[coco_idx]))))
            if vis > 0:
                entries[canon_idx] = [x, y, score]
        left_sh, right_sh = entries[5], entries[2]
        if left_sh is not None and right_sh is not None:
            entries[1] = [(left_sh[0] + right_sh[0]) / 2.0,
                          (left_sh[1] + right_sh[1]) / 2.0,
                          min(left_sh[2], right_sh[2])]
        return entries
