"""High-risk-region construction and the full per-segment pipeline.

The high-risk region is a vertical band centered on the carrier's
head-center whose half-height is a percentage of the carrier's bbox height.
A tackle is high-risk at a given percentage when the tackler's head-center y
falls inside that band (boundaries inclusive). Regions nest, so a tackle
that is high-risk at 10% is high-risk at every larger percentage.

``evaluate_segment`` composes ball tracking, role resolution, head
estimation, and classification. Pipeline errors (no tackle frame, no
tackler, no carrier head, filter divergence) mark the segment failed;
``try_evaluate_segment`` converts them into :class:`SegmentFailure` values
so a batch run can keep going and count them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoTackler, PipelineError
from .heads import HeadConfig, HeadEstimate, carrier_head, tackler_head
from .model import RiskLabel, Segment
from .roles import ResolverConfig, resolve_roles
from .tracker import TrackerConfig, track_ball

DEFAULT_REGION_PCTS = (0.05, 0.10, 0.15, 0.20, 0.25)


@dataclass(frozen=True)
class RiskConfig:
    region_pcts: tuple[float, ...] = DEFAULT_REGION_PCTS
    primary_pct: float = 0.15

    def __post_init__(self):
        if not self.region_pcts:
            raise ValueError("region_pcts must be non-empty")
        for pct in self.region_pcts:
            if not (0.0 < pct <= 0.5):
                raise ValueError(f"region pct {pct} outside (0, 0.5]")
        if self.primary_pct not in self.region_pcts:
            raise ValueError("primary_pct must be one of region_pcts")


@dataclass(frozen=True)
class TackleAssessment:
    segment_id: str
    tackle_frame: int
    carrier_index: int
    tackler_index: int
    carrier_head: HeadEstimate
    tackler_head: HeadEstimate
    regions: dict[float, tuple[float, float]]
    labels: dict[float, RiskLabel]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class SegmentFailure:
    segment_id: str
    reason: str
    message: str


def risk_region(carrier_head_y: float, carrier_bbox_height: float,
                pct: float) -> tuple[float, float]:
    """Band of half-height ``pct * bbox_height`` centered on the head-center."""
    if carrier_bbox_height <= 0:
        raise ValueError("carrier bbox height must be positive")
    half = pct * carrier_bbox_height
    return carrier_head_y - half, carrier_head_y + half


def classify(tackler_head_y: float, region: tuple[float, float]) -> RiskLabel:
    """High iff the tackler head-center y lies inside the band, inclusive."""
    y_low, y_high = region
    if y_low >= y_high:
        raise ValueError(f"region must satisfy y_low < y_high, got {region}")
    return RiskLabel.HIGH if y_low <= tackler_head_y <= y_high else RiskLabel.LOW


def evaluate_segment(seg: Segment,
                     tracker_cfg: TrackerConfig | None = None,
                     resolver_cfg: ResolverConfig | None = None,
                     head_cfg: HeadConfig | None = None,
                     risk_cfg: RiskConfig | None = None) -> TackleAssessment:
    """Full pipeline over one segment; deterministic for fixed inputs.

    Propagates PipelineError subclasses (NoTackleFrame, NoTackler,
    NoCarrierHead, DivergenceError) when the segment cannot be evaluated.
    """
    risk_cfg = risk_cfg or RiskConfig()
    head_cfg = head_cfg or HeadConfig()
    warnings: list[str] = []

    track = track_ball(seg, tracker_cfg)
    smoothed = [(float(x), float(y)) for x, y in track.smoothed]
    roles = resolve_roles(seg, smoothed, resolver_cfg, warnings)

    tackle_pos = next(p for p, f in enumerate(seg.frames)
                      if f.index == roles.tackle_frame)
    carrier_idx = roles.carrier_index_per_frame[tackle_pos]
    if carrier_idx is None:
        raise NoTackler(f"no ball-carrier in tackle frame {roles.tackle_frame}")

    carrier_est = carrier_head(seg, roles.carrier_index_per_frame,
                               roles.tackle_frame, head_cfg)
    tackler_est = tackler_head(
        seg.frames[tackle_pos].persons[roles.tackler_index], head_cfg)

    carrier_height = seg.frames[tackle_pos].persons[carrier_idx].bbox.height
    regions = {pct: risk_region(carrier_est.y, carrier_height, pct)
               for pct in risk_cfg.region_pcts}
    labels = {pct: classify(tackler_est.y, regions[pct])
              for pct in risk_cfg.region_pcts}

    return TackleAssessment(
        segment_id=seg.id,
        tackle_frame=roles.tackle_frame,
        carrier_index=carrier_idx,
        tackler_index=roles.tackler_index,
        carrier_head=carrier_est,
        tackler_head=tackler_est,
        regions=regions,
        labels=labels,
        warnings=tuple(warnings),
    )


def try_evaluate_segment(seg: Segment,
                         tracker_cfg: TrackerConfig | None = None,
                         resolver_cfg: ResolverConfig | None = None,
                         head_cfg: HeadConfig | None = None,
                         risk_cfg: RiskConfig | None = None,
                         ) -> TackleAssessment | SegmentFailure:
    """Like ``evaluate_segment`` but failures become first-class results."""
    try:
        return evaluate_segment(seg, tracker_cfg, resolver_cfg, head_cfg, risk_cfg)
    except PipelineError as exc:
        return SegmentFailure(segment_id=seg.id, reason=exc.reason, message=str(exc))


def assessment_to_dict(a: TackleAssessment) -> dict:
    pcts = sorted(a.regions)
    return {
        "segment_id": a.segment_id,
        "status": "ok",
        "tackle_frame": a.tackle_frame,
        "carrier_index": a.carrier_index,
        "tackler_index": a.tackler_index,
        "carrier_head": {"x": a.carrier_head.x, "y": a.carrier_head.y,
                         "source": a.carrier_head.source.value},
        "tackler_head": {"x": a.tackler_head.x, "y": a.tackler_head.y,
                         "source": a.tackler_head.source.value},
        "regions": [
            {"pct": pct,
             "y_low": a.regions[pct][0],
             "y_high": a.regions[pct][1],
             "label": a.labels[pct].value}
            for pct in pcts
        ],
        "warnings": list(a.warnings),
    }


def failure_to_dict(f: SegmentFailure) -> dict:
    return {"segment_id": f.segment_id, "status": "failed",
            "reason": f.reason, "message": f.message}
