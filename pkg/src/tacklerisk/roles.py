"""Ball-carrier, tackle-frame, and tackler resolution.

The carrier is re-resolved every frame as the person whose bbox center is
nearest the smoothed ball position. The tackle frame is the last frame in
which any other player's bbox overlaps the carrier's (optionally shifted a
couple of frames earlier, since contact itself tends to wreck detections).
The tackler is the non-carrier whose bbox-center y falls inside the
carrier's bbox height range and who is horizontally closest.

Persons shorter than ``min_person_height_frac`` of the frame height are
ignored throughout; distant background players otherwise produce spurious
overlaps. All ties break to the lowest person index, so resolution is
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NoTackleFrame, NoTackler
from .model import FrameRecord, Segment, bbox_center, overlaps


@dataclass(frozen=True)
class ResolverConfig:
    tackle_frame_offset: int = 0
    min_person_height_frac: float = 0.14

    def __post_init__(self):
        if not (-5 <= self.tackle_frame_offset <= 0):
            raise ValueError("tackle_frame_offset must lie in [-5, 0]")
        if not (0.0 <= self.min_person_height_frac < 1.0):
            raise ValueError("min_person_height_frac must lie in [0, 1)")


@dataclass(frozen=True)
class RoleAssignment:
    tackle_frame: int
    carrier_index_per_frame: tuple[int | None, ...]
    tackler_index: int


def eligible_person_indices(frame: FrameRecord, frame_height: float,
                            cfg: ResolverConfig) -> list[int]:
    """Indices of persons tall enough to take part in role resolution."""
    min_h = cfg.min_person_height_frac * frame_height
    return [i for i, p in enumerate(frame.persons) if p.bbox.height >= min_h]


def find_carrier(frame: FrameRecord, ball_pos: tuple[float, float],
                 eligible: Sequence[int] | None = None) -> int | None:
    """Person index nearest the ball by bbox-center distance; None if empty."""
    bx, by = ball_pos
    if not (math.isfinite(bx) and math.isfinite(by)):
        raise ValueError(f"ball position must be finite, got {ball_pos}")
    indices = range(len(frame.persons)) if eligible is None else eligible
    best: tuple[tuple[float, int], int] | None = None
    for i in indices:
        cx, cy = bbox_center(frame.persons[i].bbox)
        key = ((cx - bx) ** 2 + (cy - by) ** 2, i)
        if best is None or key < best[0]:
            best = (key, i)
    return None if best is None else best[1]


def find_tackle_frame(seg: Segment, carriers: Sequence[int | None],
                      cfg: ResolverConfig,
                      eligible_per_frame: Sequence[Sequence[int]] | None = None,
                      ) -> int:
    """Frame index of the final carrier/other-player bbox overlap, shifted
    by ``tackle_frame_offset`` and clamped to the segment.

    Raises NoTackleFrame when no frame contains an overlap.
    """
    if len(carriers) != seg.n_frames:
        raise ValueError("carriers must align with the segment frames")
    last_overlap_pos = None
    for pos, frame in enumerate(seg.frames):
        carrier = carriers[pos]
        if carrier is None:
            continue
        carrier_box = frame.persons[carrier].bbox
        others = (eligible_per_frame[pos] if eligible_per_frame is not None
                  else range(len(frame.persons)))
        for i in others:
            if i != carrier and overlaps(frame.persons[i].bbox, carrier_box):
                last_overlap_pos = pos
                break
    if last_overlap_pos is None:
        raise NoTackleFrame("no frame has a bbox overlap with the ball-carrier")
    # Offset applies along the frame list, so sparse index runs stay valid.
    pos = max(0, last_overlap_pos + cfg.tackle_frame_offset)
    return seg.frames[pos].index


def find_tackler(frame: FrameRecord, carrier_index: int,
                 eligible: Sequence[int] | None = None,
                 warnings: list[str] | None = None) -> int:
    """Non-carrier with bbox-center y inside the carrier's height range and
    the smallest horizontal center distance.

    If the height filter removes every candidate it is dropped (recorded in
    ``warnings``) and horizontal distance alone decides. Raises NoTackler
    when the carrier is the only person present.
    """
    carrier_box = frame.persons[carrier_index].bbox
    carrier_cx, _ = bbox_center(carrier_box)
    indices = range(len(frame.persons)) if eligible is None else eligible
    candidates = [i for i in indices if i != carrier_index]
    if not candidates:
        raise NoTackler("no player other than the ball-carrier in the tackle frame")

    in_range = [i for i in candidates
                if carrier_box.y_min
                <= bbox_center(frame.persons[i].bbox)[1]
                <= carrier_box.y_max]
    if not in_range:
        if warnings is not None:
            warnings.append(
                "tackler height filter eliminated every candidate; "
                "falling back to horizontal distance only"
            )
        in_range = candidates

    def key(i: int) -> tuple[float, int]:
        cx, _ = bbox_center(frame.persons[i].bbox)
        return abs(cx - carrier_cx), i

    return min(in_range, key=key)


def resolve_roles(seg: Segment, smoothed_ball: Sequence[tuple[float, float]],
                  cfg: ResolverConfig | None = None,
                  warnings: list[str] | None = None) -> RoleAssignment:
    """Run the full carrier -> tackle frame -> tackler resolution."""
    cfg = cfg or ResolverConfig()
    eligible = [eligible_person_indices(f, seg.height, cfg) for f in seg.frames]
    carriers = tuple(
        find_carrier(frame, smoothed_ball[pos], eligible[pos])
        for pos, frame in enumerate(seg.frames)
    )
    tackle_frame = find_tackle_frame(seg, carriers, cfg, eligible)
    pos = next(p for p, f in enumerate(seg.frames) if f.index == tackle_frame)
    carrier = carriers[pos]
    if carrier is None:
        raise NoTackler(f"no ball-carrier resolvable in tackle frame {tackle_frame}")
    tackler = find_tackler(seg.frames[pos], carrier, eligible[pos], warnings)
    return RoleAssignment(tackle_frame=tackle_frame,
                          carrier_index_per_frame=carriers,
                          tackler_index=tackler)
