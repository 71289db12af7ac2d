"""Timestamped sample records shared by the engine, datastore, and service."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AnalysisError
from .vna import ComplexTrace


@dataclass(frozen=True)
class MagneticFluxSample:
    bx: float
    by: float
    bz: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.bx, self.by, self.bz)):
            raise AnalysisError("flux sample contains non-finite component")

    @property
    def b(self) -> tuple[float, float, float]:
        return (self.bx, self.by, self.bz)


@dataclass(frozen=True)
class AngleSample:
    theta_deg: float

    def __post_init__(self):
        if not 0.0 <= self.theta_deg < 360.0:
            raise AnalysisError(f"angle {self.theta_deg} outside [0, 360)")


@dataclass(frozen=True)
class ActuationEvent:
    event: str
    position: int


@dataclass(frozen=True)
class GapMarker:
    """Ticks skipped after an overrun; deadlines never shift silently."""

    missed_ticks: int
    reason: str = "overrun"


@dataclass(frozen=True)
class ErrorMarker:
    """A modality-level failure recorded in the buffer (non-fatal in parallel)."""

    message: str


@dataclass(frozen=True)
class TraceSample:
    trace: ComplexTrace
    step_id: int = 1


Payload = object  # TraceSample | MagneticFluxSample | AngleSample | ActuationEvent | markers


@dataclass(frozen=True)
class TimestampedSample:
    t_ms: float
    modality: str
    payload: Payload
