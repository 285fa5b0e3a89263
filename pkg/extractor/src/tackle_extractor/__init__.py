"""Offline adapter: pretrained/classical detectors over a video clip,
emitting the canonical detection-segment JSON."""

from .extract import ExtractionError, ExtractorConfig, extract
from .schema import SchemaViolation, validate_segment_doc

__version__ = "0.1.0"
