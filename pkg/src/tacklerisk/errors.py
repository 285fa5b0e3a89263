"""Exception hierarchy shared across the package.

``PipelineError`` subclasses carry a stable ``reason`` code so batch runners
can record a failed segment as data instead of crashing.
"""

from __future__ import annotations


class TackleRiskError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(TackleRiskError):
    """A document does not match the canonical schema (shape or type)."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantError(TackleRiskError):
    """A value violates a documented domain invariant."""


class PipelineError(TackleRiskError):
    """A per-segment evaluation failure; marks the segment failed, not the run."""

    reason = "pipeline_error"


class DivergenceError(PipelineError):
    """Tracker covariance blew up past the stability guard."""

    reason = "divergence"


class NoTackleFrame(PipelineError):
    """No frame shows a bbox overlap between the carrier and another player."""

    reason = "no_tackle_frame"


class NoTackler(PipelineError):
    """The tackle frame has no candidate player besides the carrier."""

    reason = "no_tackler"


class NoCarrierHead(PipelineError):
    """The carrier could not be resolved anywhere in the head-average window."""

    reason = "no_carrier_head"
