"""Simulated peripheral backends: stepper motor, Hall-effect flux sensor, and
the serial resource-manager bridge stand-in.

Context keys (all optional): "scenario" (a simulator Scenario), "clock" (a
SharedClock). A Hall sensor without a scenario behaves as disconnected.
"""

from __future__ import annotations

from .clock import SharedClock
from .errors import SamplingError
from .peripherals import Peripheral
from .samples import ActuationEvent, MagneticFluxSample, TimestampedSample


class SerialBridge(Peripheral):
    """Stand-in for the USB-to-serial resource manager that fronts hardware
    peripherals; tracks the byte-level command log and nothing else."""

    kind = "bridge"

    def __init__(self, key="", label="", context=None):
        super().__init__(key, label, context)
        self.command_log: list[bytes] = []

    def actuate(self, command: bytes = b"") -> None:
        self.command_log.append(bytes(command))


class SimStepper(Peripheral):
    """Open-loop stepper: software-tracked cumulative position; advances the
    attached tomography scenario (if any) by the same step count."""

    kind = "actuator"

    def __init__(self, key="", label="", context=None):
        super().__init__(key, label, context)
        self.position = 0
        self._clock: SharedClock = self.context.get("clock") or SharedClock()

    def actuate(self, n_steps: int = 1) -> TimestampedSample:
        if n_steps < 1:
            raise SamplingError(f"n_steps must be >= 1, got {n_steps}")
        self.position += n_steps
        scenario = self.context.get("scenario")
        if scenario is not None and hasattr(scenario, "advance_steps"):
            scenario.advance_steps(n_steps)
        return TimestampedSample(
            t_ms=self._clock.now_ms(),
            modality=self.key or "stepper",
            payload=ActuationEvent(event="advance", position=self.position),
        )


class SimHall(Peripheral):
    """Hall-effect flux sensor coupled to the loop scenario's angle trajectory."""

    kind = "sensor"

    def __init__(self, key="", label="", context=None):
        super().__init__(key, label, context)
        self._clock: SharedClock = self.context.get("clock") or SharedClock()
        self._t0_ms = self._clock.monotonic_ms()

    def sample(self) -> MagneticFluxSample:
        scenario = self.context.get("scenario")
        if scenario is None or not hasattr(scenario, "flux_at"):
            raise SamplingError(f"hall sensor {self.key!r}: backend disconnected")
        if hasattr(scenario, "flux_now"):
            return scenario.flux_now()
        t_s = (self._clock.monotonic_ms() - self._t0_ms) / 1000.0
        return scenario.flux_at(t_s)
