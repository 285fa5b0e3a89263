"""Shared scenario builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from tacklerisk.synthgen import ActorSpec, OutlierSpec, ScenarioSpec

ZERO_NOISE = dict(noise_mean=(0.0, 0.0), noise_std=(0.0, 0.0),
                  keypoint_jitter_std=0.0)


def tackle_spec(seg_id: str, seed: int, *, high_risk: bool = True,
                n_frames: int = 60, clean: bool = False,
                outliers: tuple[OutlierSpec, ...] = (),
                **overrides) -> ScenarioSpec:
    """A straightforward one-on-one tackle: carrier stands near mid-frame,
    tackler closes from the right and makes contact in the final frames."""
    kwargs = dict(
        id=seg_id,
        seed=seed,
        n_frames=n_frames,
        carrier=ActorSpec(start_x=600.0, start_y=360.0, body_height=300.0),
        tackler=ActorSpec(start_x=950.0, vel_x=-140.0, body_height=300.0),
        tackler_head_offset_frac=0.0 if high_risk else 0.4,
        outliers=outliers,
    )
    if clean:
        kwargs.update(ZERO_NOISE)
    kwargs.update(overrides)
    return ScenarioSpec(**kwargs)


def varied_tackle_spec(seg_id: str, seed: int, *, high_risk: bool,
                       with_outlier: bool, n_frames: int = 60) -> ScenarioSpec:
    """Like ``tackle_spec`` but with seed-driven geometry variation, for
    corpus-level tests."""
    rng = np.random.default_rng(seed ^ 0x5EED)
    # Bounded height mismatch keeps the carrier strictly nearest the ball
    # even at the deepest overlap, and keeps the tackler's bbox center
    # inside the carrier's height range.
    carrier_h = float(rng.uniform(260.0, 320.0))
    tackler_h = carrier_h + float(rng.uniform(-30.0, 30.0))
    carrier_x = float(rng.uniform(500.0, 700.0))
    carrier_vx = float(rng.uniform(-30.0, 30.0))
    fps = 30.0
    duration = n_frames / fps
    # Tackler start/speed chosen so boxes first overlap ~6 frames before the
    # end and still overlap (without crossing) at the last frame.
    contact_gap = 0.35 * (carrier_h + tackler_h) / 2.0
    t_contact = duration - 6.0 / fps
    closing = float(rng.uniform(100.0, 150.0))
    tackler_vx = carrier_vx - closing
    tackler_x = (carrier_x + carrier_vx * t_contact + contact_gap
                 - tackler_vx * t_contact)
    offset = 0.0 if high_risk else float(rng.uniform(0.35, 0.42))
    outliers = ()
    if with_outlier:
        # displacement exceeds the tracker's steady-state 5-sigma gates
        # (~282 px in x, ~167 px in y) on both axes while keeping the
        # displaced detection inside the frame
        frame = int(rng.integers(15, n_frames - 12))
        if carrier_x < 640:
            dx = float(rng.uniform(350, 450))
        else:
            dx = -float(rng.uniform(350, 420))
        outliers = (OutlierSpec(frame=frame, dx=dx,
                                dy=float(rng.uniform(240, 330)),
                                confidence=0.9),)
    return ScenarioSpec(
        id=seg_id,
        seed=seed,
        n_frames=n_frames,
        fps=fps,
        carrier=ActorSpec(start_x=carrier_x, start_y=360.0, vel_x=carrier_vx,
                          body_height=carrier_h),
        tackler=ActorSpec(start_x=tackler_x, vel_x=tackler_vx,
                          body_height=tackler_h),
        tackler_head_offset_frac=offset,
        outliers=outliers,
    )


@pytest.fixture
def clean_high_spec() -> ScenarioSpec:
    return tackle_spec("clean-high", seed=11, high_risk=True, clean=True)


@pytest.fixture
def clean_low_spec() -> ScenarioSpec:
    return tackle_spec("clean-low", seed=12, high_risk=False, clean=True)
