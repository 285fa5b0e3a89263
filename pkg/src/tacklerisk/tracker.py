"""Gated constant-acceleration Kalman filter over bbox-center trajectories.

The state is the six-vector (x, x', x'', y, y', y'') in pixels, pixels/s and
pixels/s^2. Per axis the transition is the kinematic block

    [1  dt  dt^2/2]
    [0   1      dt]
    [0   0       1]

and the process noise is a discrete white-jerk model, Q = G * sigma^2 * G^T
with G = (dt^2/2, dt, 1)^T, where sigma is the per-step change in
acceleration the tracker tolerates (``max_daccel_*``; the much smaller
``degraded_daccel`` right after a low-confidence measurement).

Measurements are bbox centers with a detector confidence. Three rejection
mechanisms exist and are kept distinct:

* confidence below ``conf_floor``: the innovation is zeroed but the update
  still runs with the measurement covariance inflated to the squared image
  dimensions, and the next predict uses the degraded process noise;
* innovation outside ``gate_sigma`` standard deviations of the innovation
  covariance on either axis: the step is skipped entirely (mean and
  covariance both keep their predicted values);
* no measurement at all: likewise a pure-prediction step.

A fixed-interval (Rauch-Tung-Striebel) backward pass refines the filtered
trajectory once the whole segment has been seen.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError
from .model import FrameRecord, Segment, bbox_center

#: Covariance diagonal (pixels^2) past which the filter is declared unstable.
DIVERGENCE_LIMIT = 1e12

_N_STATES = 6
_H = np.zeros((2, _N_STATES))
_H[0, 0] = 1.0
_H[1, 3] = 1.0

Measurement = tuple[float, float, float]  # (x, y, confidence)


class Rejection(enum.Enum):
    NONE = "none"
    LOW_CONFIDENCE = "low_confidence"
    GATE_EXCEEDED = "gate_exceeded"
    NO_MEASUREMENT = "no_measurement"


@dataclass(frozen=True)
class TrackerConfig:
    """Filter parameters; defaults are the tuned production values."""

    meas_std_x: float = 31.0
    meas_std_y: float = 15.0
    max_daccel_x: float = 6000.0
    max_daccel_y: float = 7000.0
    gate_sigma: float = 5.0
    conf_floor: float = 0.1
    degraded_daccel: float = 50.0
    init_pos_var: float = 50.0
    init_vel_var: float = 10.0
    init_acc_var: float = 1.0

    def __post_init__(self):
        for name in ("meas_std_x", "meas_std_y", "max_daccel_x", "max_daccel_y",
                     "gate_sigma", "degraded_daccel", "init_pos_var",
                     "init_vel_var", "init_acc_var"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not (0.0 < self.conf_floor < 1.0):
            raise ValueError("conf_floor must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class TrackerState:
    """Mean (6,) and covariance (6, 6) of the kinematic state."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float).copy())
        object.__setattr__(self, "covariance",
                           np.asarray(self.covariance, dtype=float).copy())
        if self.mean.shape != (_N_STATES,):
            raise ValueError(f"mean must have shape (6,), got {self.mean.shape}")
        if self.covariance.shape != (_N_STATES, _N_STATES):
            raise ValueError(f"covariance must have shape (6, 6), got {self.covariance.shape}")
        self.mean.setflags(write=False)
        self.covariance.setflags(write=False)

    @property
    def position(self) -> tuple[float, float]:
        return float(self.mean[0]), float(self.mean[3])


@dataclass(frozen=True, eq=False)
class StepDiagnostics:
    frame_index: int
    innovation: np.ndarray          # (2,)
    innovation_cov: np.ndarray      # (2, 2)
    accepted: bool
    rejection_reason: Rejection

    def __post_init__(self):
        if self.accepted != (self.rejection_reason is Rejection.NONE):
            raise ValueError("accepted must match rejection_reason == NONE")


@dataclass(frozen=True, eq=False)
class BallTrack:
    """Filtered and smoothed trajectories for one segment, with diagnostics."""

    filtered: np.ndarray            # (n, 2) posterior positions
    smoothed: np.ndarray            # (n, 2)
    diagnostics: tuple[StepDiagnostics, ...]
    measurements: tuple[Measurement | None, ...]

    def __post_init__(self):
        n = len(self.diagnostics)
        if not (self.filtered.shape == self.smoothed.shape == (n, 2)
                and len(self.measurements) == n):
            raise ValueError("track arrays must all cover the same frame count")


def transition_matrix(dt: float) -> np.ndarray:
    """Block-diagonal constant-acceleration transition for both axes."""
    f_axis = np.array([[1.0, dt, 0.5 * dt * dt],
                       [0.0, 1.0, dt],
                       [0.0, 0.0, 1.0]])
    out = np.zeros((_N_STATES, _N_STATES))
    out[:3, :3] = f_axis
    out[3:, 3:] = f_axis
    return out


def process_noise(dt: float, daccel_x: float, daccel_y: float) -> np.ndarray:
    g = np.array([0.5 * dt * dt, dt, 1.0]).reshape(3, 1)
    ggt = g @ g.T
    out = np.zeros((_N_STATES, _N_STATES))
    out[:3, :3] = ggt * daccel_x ** 2
    out[3:, 3:] = ggt * daccel_y ** 2
    return out


def init_state(segment_width: float, segment_height: float,
               cfg: TrackerConfig) -> TrackerState:
    """Start at the image center with zero velocity and acceleration."""
    mean = np.array([segment_width / 2.0, 0.0, 0.0,
                     segment_height / 2.0, 0.0, 0.0])
    diag = [cfg.init_pos_var, cfg.init_vel_var, cfg.init_acc_var] * 2
    return TrackerState(mean=mean, covariance=np.diag(diag))


def predict(s: TrackerState, dt: float, cfg: TrackerConfig,
            degraded: bool = False) -> TrackerState:
    """Propagate one step of length ``dt`` seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if degraded:
        daccel_x = daccel_y = cfg.degraded_daccel
    else:
        daccel_x, daccel_y = cfg.max_daccel_x, cfg.max_daccel_y
    f = transition_matrix(dt)
    q = process_noise(dt, daccel_x, daccel_y)
    mean = f @ s.mean
    cov = f @ s.covariance @ f.T + q
    cov = 0.5 * (cov + cov.T)
    return TrackerState(mean=mean, covariance=cov)


def gate(innovation: np.ndarray, innovation_cov: np.ndarray, confidence: float,
         cfg: TrackerConfig) -> tuple[bool, Rejection]:
    """Decide whether a measurement survives the confidence and sigma gates.

    The sigma test is per axis (|y_i| > gate_sigma * sqrt(S_ii)), matching
    the scalar-standard-deviation convention the filter was tuned with.
    """
    if confidence < cfg.conf_floor:
        return False, Rejection.LOW_CONFIDENCE
    bound = cfg.gate_sigma * np.sqrt(np.diag(innovation_cov))
    if np.any(np.abs(innovation) > bound):
        return False, Rejection.GATE_EXCEEDED
    return True, Rejection.NONE


def update(s: TrackerState, measurement: Measurement | None, cfg: TrackerConfig,
           frame_size: tuple[float, float],
           frame_index: int = 0) -> tuple[TrackerState, StepDiagnostics]:
    """Fold one (optional) measurement into the predicted state.

    ``frame_size`` supplies the (width, height) used for the inflated
    measurement covariance on low-confidence detections.
    """
    r_normal = np.diag([cfg.meas_std_x ** 2, cfg.meas_std_y ** 2])

    if measurement is None:
        s_cov = _H @ s.covariance @ _H.T + r_normal
        diag = StepDiagnostics(frame_index=frame_index, innovation=np.zeros(2),
                               innovation_cov=s_cov, accepted=False,
                               rejection_reason=Rejection.NO_MEASUREMENT)
        return s, diag

    mx, my, confidence = measurement
    low_conf = confidence < cfg.conf_floor
    if low_conf:
        w, h = frame_size
        r = np.diag([w ** 2, h ** 2])
    else:
        r = r_normal

    innovation = np.array([mx, my]) - _H @ s.mean
    s_cov = _H @ s.covariance @ _H.T + r
    accepted, reason = gate(innovation, s_cov, confidence, cfg)

    if reason is Rejection.GATE_EXCEEDED:
        diag = StepDiagnostics(frame_index=frame_index, innovation=innovation,
                               innovation_cov=s_cov, accepted=False,
                               rejection_reason=reason)
        return s, diag

    gain = np.linalg.solve(s_cov, _H @ s.covariance).T
    if accepted:
        mean = s.mean + gain @ innovation
    else:
        # Low confidence: innovation zeroed, covariance still shrinks under
        # the inflated R.
        mean = s.mean
    ikh = np.eye(_N_STATES) - gain @ _H
    cov = ikh @ s.covariance @ ikh.T + gain @ r @ gain.T
    cov = 0.5 * (cov + cov.T)
    diag = StepDiagnostics(frame_index=frame_index, innovation=innovation,
                           innovation_cov=s_cov, accepted=accepted,
                           rejection_reason=reason)
    return TrackerState(mean=mean, covariance=cov), diag


def smooth(steps: Sequence[tuple[TrackerState, TrackerState]],
           dt: float) -> list[TrackerState]:
    """Fixed-interval RTS backward pass over (prior, posterior) pairs.

    The last smoothed state equals the last filtered state exactly.
    """
    if not steps:
        raise ValueError("smooth requires at least one (prior, posterior) pair")
    f = transition_matrix(dt)
    n = len(steps)
    out: list[TrackerState] = [None] * n  # type: ignore[list-item]
    out[-1] = steps[-1][1]
    for k in range(n - 2, -1, -1):
        prior_next, _ = steps[k + 1]
        _, post_k = steps[k]
        # C = P_k|k F^T P_{k+1|k}^-1  (all covariances symmetric)
        c = np.linalg.solve(prior_next.covariance, f @ post_k.covariance).T
        mean = post_k.mean + c @ (out[k + 1].mean - prior_next.mean)
        cov = post_k.covariance + c @ (out[k + 1].covariance
                                       - prior_next.covariance) @ c.T
        cov = 0.5 * (cov + cov.T)
        out[k] = TrackerState(mean=mean, covariance=cov)
    return out


def select_measurement(frame: FrameRecord,
                       predicted: tuple[float, float]) -> Measurement | None:
    """Pick the ball candidate whose bbox center is nearest the prediction.

    Ties fall to the higher confidence, then to the lower list index.
    """
    px, py = predicted
    best = None
    for idx, ball in enumerate(frame.balls):
        cx, cy = bbox_center(ball.bbox)
        d2 = (cx - px) ** 2 + (cy - py) ** 2
        key = (d2, -ball.confidence, idx)
        if best is None or key < best[0]:
            best = (key, (cx, cy, ball.confidence))
    return None if best is None else best[1]


@dataclass(frozen=True, eq=False)
class FilterRun:
    """Raw per-frame output of one predict/update sweep."""

    priors: tuple[TrackerState, ...]
    posteriors: tuple[TrackerState, ...]
    diagnostics: tuple[StepDiagnostics, ...]
    measurements: tuple[Measurement | None, ...]


def run_filter(frame_indices: Sequence[int],
               measure: Callable[[int, tuple[float, float]], Measurement | None],
               dt: float, frame_size: tuple[float, float], cfg: TrackerConfig,
               init: TrackerState) -> FilterRun:
    """Predict/update sweep over ``frame_indices``.

    ``measure(step, predicted_position)`` returns the measurement chosen for
    that step, or None. Every step predicts first (including the first one,
    so the initial state is never reported directly).
    """
    priors: list[TrackerState] = []
    posteriors: list[TrackerState] = []
    diags: list[StepDiagnostics] = []
    measurements: list[Measurement | None] = []
    state = init
    degraded = False

    def check(s: TrackerState, frame_index: int) -> None:
        if np.any(np.diag(s.covariance) > DIVERGENCE_LIMIT):
            raise DivergenceError(
                f"covariance diagonal exceeded {DIVERGENCE_LIMIT:g} px^2 at "
                f"frame {frame_index}"
            )

    for step, frame_index in enumerate(frame_indices):
        state = predict(state, dt, cfg, degraded=degraded)
        check(state, frame_index)
        priors.append(state)
        m = measure(step, state.position)
        state, diag = update(state, m, cfg, frame_size, frame_index=frame_index)
        check(state, frame_index)
        degraded = diag.rejection_reason is Rejection.LOW_CONFIDENCE
        posteriors.append(state)
        diags.append(diag)
        measurements.append(m)
    return FilterRun(priors=tuple(priors), posteriors=tuple(posteriors),
                     diagnostics=tuple(diags), measurements=tuple(measurements))


def track_ball(seg: Segment, cfg: TrackerConfig | None = None) -> BallTrack:
    """Track the ball across a whole segment and smooth the result."""
    cfg = cfg or TrackerConfig()
    dt = 1.0 / seg.fps
    init = init_state(seg.width, seg.height, cfg)

    def measure(step: int, predicted: tuple[float, float]) -> Measurement | None:
        return select_measurement(seg.frames[step], predicted)

    run = run_filter([f.index for f in seg.frames], measure, dt,
                     (float(seg.width), float(seg.height)), cfg, init)
    smoothed_states = smooth(list(zip(run.priors, run.posteriors)), dt)
    filtered = np.array([s.position for s in run.posteriors])
    smoothed = np.array([s.position for s in smoothed_states])
    return BallTrack(filtered=filtered, smoothed=smoothed,
                     diagnostics=run.diagnostics, measurements=run.measurements)


def track_to_dict(seg: Segment, track: BallTrack) -> dict:
    """Debug-dump form of a track (consumed by the CLI plot emitter)."""
    frames = []
    for i, diag in enumerate(track.diagnostics):
        m = track.measurements[i]
        frames.append({
            "index": diag.frame_index,
            "measured": None if m is None else [m[0], m[1]],
            "confidence": None if m is None else m[2],
            "filtered": [float(track.filtered[i, 0]), float(track.filtered[i, 1])],
            "smoothed": [float(track.smoothed[i, 0]), float(track.smoothed[i, 1])],
            "accepted": diag.accepted,
            "reason": diag.rejection_reason.value,
            "innovation": [float(diag.innovation[0]), float(diag.innovation[1])],
            "S_diag": [float(diag.innovation_cov[0, 0]),
                       float(diag.innovation_cov[1, 1])],
        })
    return {"segment_id": seg.id, "fps": seg.fps, "frames": frames}
