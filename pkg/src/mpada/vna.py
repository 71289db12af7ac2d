"""Typed client for any SCPI VNA (real or simulated): sweep setup, trigger, trace read.

Trace wire encoding: 64-bit little-endian floats, interleaved re/im, inside a
definite-length block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AcquisitionError, InstrumentError

DIALECT_COMMANDS = (
    "*IDN?", "*RST", "*OPC?",
    ":SENS:FREQ:STAR", ":SENS:FREQ:STOP", ":SENS:SWE:POIN",
    ":SENS:SWE:TIME?", ":INIT:IMM", ":CALC:DATA? SDATA",
)


@dataclass(frozen=True)
class FrequencyGrid:
    start_hz: float
    stop_hz: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 1:
            raise InstrumentError(f"n_points must be >= 1, got {self.n_points}")
        if self.n_points == 1 and self.start_hz != self.stop_hz:
            raise InstrumentError("single-point grid requires start == stop")
        if self.n_points >= 2 and not self.start_hz < self.stop_hz:
            raise InstrumentError(
                f"start {self.start_hz} must be < stop {self.stop_hz} for n_points >= 2"
            )

    def frequencies(self) -> np.ndarray:
        return np.linspace(self.start_hz, self.stop_hz, self.n_points)


@dataclass(frozen=True)
class ComplexTrace:
    """One frequency sweep on one (tx, rx) path."""

    grid: FrequencyGrid
    values: np.ndarray
    path: tuple[str, str] = ("P1", "P2")

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n_points,):
            raise AcquisitionError(
                f"trace length {values.shape} != grid n_points {self.grid.n_points}"
            )
        if not np.all(np.isfinite(values)):
            raise AcquisitionError("trace contains non-finite values")


def decode_trace_block(payload: bytes, grid: FrequencyGrid,
                       path: tuple[str, str]) -> ComplexTrace:
    """Decode interleaved (re, im) float64-LE pairs into a ComplexTrace."""
    if len(payload) % 16 != 0:
        raise AcquisitionError(f"trace block of {len(payload)} bytes is not a whole"
                               " number of re/im float64 pairs")
    flat = np.frombuffer(payload, dtype="<f8")
    if flat.size != 2 * grid.n_points:
        raise AcquisitionError(
            f"decode: got {flat.size} numbers for {grid.n_points} points (expected"
            f" {2 * grid.n_points})"
        )
    values = flat[0::2] + 1j * flat[1::2]
    return ComplexTrace(grid=grid, values=values, path=path)


def encode_trace_values(values: np.ndarray) -> bytes:
    """Inverse of decode_trace_block's number layout (used by the simulator)."""
    values = np.asarray(values, dtype=complex)
    flat = np.empty(2 * values.size, dtype="<f8")
    flat[0::2] = values.real
    flat[1::2] = values.imag
    return flat.tobytes()


@dataclass
class VnaClient:
    """Drives one VNA over an owned ScpiConnection; commands are serialized
    by whoever owns the client (the acquisition engine)."""

    conn: object  # ScpiConnection or anything with ask/ask_block/write
    configured_grid: FrequencyGrid | None = None
    calibration_state: str = field(default="uncalibrated")

    def identify(self) -> str:
        return self.conn.ask("*IDN?")

    def reset(self):
        self.conn.write("*RST")
        self.conn.ask("*OPC?")
        self.configured_grid = None

    def configure_sweep(self, grid: FrequencyGrid) -> None:
        """Push the grid to the instrument and verify the echo-back."""
        self.conn.write(f":SENS:FREQ:STAR {grid.start_hz:.10g}")
        self.conn.write(f":SENS:FREQ:STOP {grid.stop_hz:.10g}")
        self.conn.write(f":SENS:SWE:POIN {grid.n_points}")
        points = self.conn.ask(":SENS:SWE:POIN?")
        if points.startswith("-"):
            raise InstrumentError(f"instrument rejected sweep config: {points}")
        if int(points) != grid.n_points:
            raise InstrumentError(
                f"instrument reports {points} points after configuring {grid.n_points}"
            )
        self.configured_grid = grid

    def query_grid(self) -> FrequencyGrid:
        start = float(self.conn.ask(":SENS:FREQ:STAR?"))
        stop = float(self.conn.ask(":SENS:FREQ:STOP?"))
        points = int(self.conn.ask(":SENS:SWE:POIN?"))
        return FrequencyGrid(start, stop, points)

    def min_sweep_time_s(self) -> float:
        """Instrument-reported minimum achievable sweep time, seconds."""
        return float(self.conn.ask(":SENS:SWE:TIME?"))

    def trigger_and_read(self, path: tuple[str, str] = ("P1", "P2")) -> ComplexTrace:
        if self.configured_grid is None:
            raise AcquisitionError("trigger_and_read before configure_sweep")
        self.conn.write(":INIT:IMM")
        self.conn.ask("*OPC?")
        payload = self.conn.ask_block(":CALC:DATA? SDATA")
        return decode_trace_block(payload, self.configured_grid, path)
