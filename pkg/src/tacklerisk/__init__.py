"""Tackle risk classification from detection streams.

The pipeline tracks the ball with a gated constant-acceleration Kalman
filter, resolves ball-carrier and tackler, fuses keypoint and geometric
head-center estimates, and classifies the tackle against configurable
high-risk regions. A metrics harness scores batches against analyst labels
and a seeded scenario generator provides ground truth for testing.
"""

from .classify import (DEFAULT_REGION_PCTS, RiskConfig, SegmentFailure,
                       TackleAssessment, classify, evaluate_segment,
                       risk_region, try_evaluate_segment)
from .errors import (DivergenceError, InvariantError, NoCarrierHead,
                     NoTackleFrame, NoTackler, PipelineError, SchemaError,
                     TackleRiskError)
from .heads import (HeadConfig, HeadEstimate, HeadSource, carrier_head,
                    geometric_head_y, head_center_from_keypoints, tackler_head)
from .metrics import (ConfusionCounts, EmptyEvaluation, MetricsReport,
                      MissingLabel, ZeroTotal, accuracy, cohens_kappa, f1,
                      precision, recall, report, tally)
from .model import (BBox, BallDetection, FrameRecord, GroundTruthLabel,
                    Keypoint, KeypointSet, PersonDetection, RiskLabel,
                    Segment, ValidationWarning, bbox_center, iou, overlaps,
                    load_segment, load_truth_csv, parse_segment,
                    parse_truth_csv, serialize_segment)
from .roles import (ResolverConfig, RoleAssignment, find_carrier,
                    find_tackle_frame, find_tackler, resolve_roles)
from .synthgen import (ActorSpec, DuplicateId, GeometryError, OutlierSpec,
                       ScenarioSpec, ScenarioTruth, gen_segment, sweep)
from .tracker import (BallTrack, Rejection, StepDiagnostics, TrackerConfig,
                      TrackerState, gate, init_state, predict,
                      select_measurement, smooth, track_ball, update)

__version__ = "0.1.0"
