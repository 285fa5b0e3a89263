"""Head-center estimation for the ball-carrier and the tackler.

The carrier's head is observable across many frames, so its facial-keypoint
head-centers run through the same constant-acceleration filter used for the
ball (wider measurement noise, tighter 3-sigma gate, initialized at the
first observed head-center) and the smoothed positions of the final few
frames are averaged.

The tackler is often only detected in the tackle frame itself, so no filter
can run; instead the keypoint head-center y is averaged with a geometric
estimate that places the head-center at a fixed fraction of the bbox height
from the top (half of the 1:8 head-to-body ratio, i.e. 7.5%).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import NoCarrierHead
from .model import (BBox, FACE_KEYPOINTS, KeypointSet, PersonDetection,
                    Segment, bbox_center)
from .tracker import TrackerConfig, TrackerState, init_state, run_filter, smooth


@dataclass(frozen=True)
class HeadConfig:
    head_meas_std: float = 50.0
    head_init_pos_var: float = 70.0
    head_gate_sigma: float = 3.0
    tail_frames: int = 3
    head_frac: float = 0.075

    def __post_init__(self):
        for name in ("head_meas_std", "head_init_pos_var", "head_gate_sigma",
                     "tail_frames"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not (0.0 < self.head_frac < 0.5):
            raise ValueError("head_frac must lie in (0, 0.5)")


class HeadSource(enum.Enum):
    KEYPOINTS = "keypoints"
    FUSED = "fused"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class HeadEstimate:
    x: float
    y: float
    source: HeadSource


def head_center_from_keypoints(kp: KeypointSet) -> tuple[float, float] | None:
    """Mean of the present facial keypoints; None below 2 of the 5."""
    pts = kp.present(FACE_KEYPOINTS)
    if len(pts) < 2:
        return None
    n = len(pts)
    return sum(p.x for p in pts) / n, sum(p.y for p in pts) / n


def geometric_head_y(b: BBox, head_frac: float) -> float:
    """Head-center y at ``head_frac`` of the bbox height from the top."""
    return b.y_min + head_frac * b.height


def _head_tracker_config(cfg: HeadConfig) -> TrackerConfig:
    # Same filter as the ball tracker except for the listed overrides.
    return replace(TrackerConfig(),
                   meas_std_x=cfg.head_meas_std,
                   meas_std_y=cfg.head_meas_std,
                   gate_sigma=cfg.head_gate_sigma,
                   init_pos_var=cfg.head_init_pos_var)


def carrier_head(seg: Segment, carriers: Sequence[int | None],
                 tackle_frame: int, cfg: HeadConfig | None = None) -> HeadEstimate:
    """Filter the carrier's keypoint head-centers up to the tackle frame and
    average the smoothed tail.

    Falls back to the geometric estimate from the carrier bbox when the tail
    window holds no keypoint head-centers at all. Raises NoCarrierHead when
    the carrier is unresolved across the whole tail window.
    """
    cfg = cfg or HeadConfig()
    tackle_pos = next(p for p, f in enumerate(seg.frames)
                      if f.index == tackle_frame)

    measurements: list[tuple[float, float, float] | None] = []
    for pos in range(tackle_pos + 1):
        idx = carriers[pos]
        if idx is None:
            measurements.append(None)
            continue
        person = seg.frames[pos].persons[idx]
        if person.keypoints is None:
            measurements.append(None)
            continue
        center = head_center_from_keypoints(person.keypoints)
        measurements.append(None if center is None else (*center, 1.0))

    tail_start = max(0, tackle_pos + 1 - cfg.tail_frames)
    tail_positions = range(tail_start, tackle_pos + 1)
    tail_carrier_positions = [p for p in tail_positions if carriers[p] is not None]
    if not tail_carrier_positions:
        raise NoCarrierHead(
            f"ball-carrier unresolved across the {cfg.tail_frames}-frame window "
            f"ending at frame {tackle_frame}"
        )

    if all(measurements[p] is None for p in tail_positions):
        box = seg.frames[tail_carrier_positions[-1]].persons[
            carriers[tail_carrier_positions[-1]]].bbox
        cx, _ = bbox_center(box)
        return HeadEstimate(x=cx, y=geometric_head_y(box, cfg.head_frac),
                            source=HeadSource.GEOMETRIC)

    first = next(p for p in range(tackle_pos + 1) if measurements[p] is not None)
    tracker_cfg = _head_tracker_config(cfg)
    mx, my, _ = measurements[first]
    init = TrackerState(
        mean=[mx, 0.0, 0.0, my, 0.0, 0.0],
        covariance=init_state(seg.width, seg.height, tracker_cfg).covariance,
    )
    window = list(range(first, tackle_pos + 1))
    run = run_filter(
        [seg.frames[p].index for p in window],
        lambda step, _pred: measurements[window[step]],
        1.0 / seg.fps,
        (float(seg.width), float(seg.height)),
        tracker_cfg,
        init,
    )
    smoothed = smooth(list(zip(run.priors, run.posteriors)), 1.0 / seg.fps)
    tail = smoothed[-min(cfg.tail_frames, len(smoothed)):]
    x = sum(s.position[0] for s in tail) / len(tail)
    y = sum(s.position[1] for s in tail) / len(tail)
    return HeadEstimate(x=x, y=y, source=HeadSource.KEYPOINTS)


def tackler_head(p: PersonDetection, cfg: HeadConfig | None = None) -> HeadEstimate:
    """Average the keypoint head-center y with the geometric estimate.

    x comes from the keypoints alone; only the vertical coordinate carries
    an anthropometric prior. Purely geometric when keypoints are missing.
    """
    cfg = cfg or HeadConfig()
    geo_y = geometric_head_y(p.bbox, cfg.head_frac)
    center = None if p.keypoints is None else head_center_from_keypoints(p.keypoints)
    if center is None:
        cx, _ = bbox_center(p.bbox)
        return HeadEstimate(x=cx, y=geo_y, source=HeadSource.GEOMETRIC)
    kx, ky = center
    return HeadEstimate(x=kx, y=(ky + geo_y) / 2.0, source=HeadSource.FUSED)
