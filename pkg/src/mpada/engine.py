"""Acquisition engine: plan model, drift-free tick schedules, sequential and
parallel runners, and plan validation.

Scheduling is anchored: deadline[k] = t0 + k*T, never relative to the previous
wakeup, so the schedule itself carries no cumulative drift; only wakeups
jitter. Overruns skip the missed ticks (recorded as gap markers) and resume on
the original schedule.
"""

from __future__ import annotations

import json
import sys
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from queue import Full, Queue

from .clock import SharedClock, sleep_until  # noqa: F401  (re-exported)
from .errors import AcquisitionError, ConfigError, PlanValidationError, SamplingError
from .peripherals import Peripheral
from .samples import (ErrorMarker, GapMarker, TimestampedSample, TraceSample)
from .switching import PortPinMap, SweepSequence, SwitchFabric, load_pin_map, load_sequence
from .vna import FrequencyGrid, VnaClient

MAX_BUFFER_SAMPLES = 1_000_000
EVENT_MODALITY = "cycle"  # sequential-mode schedule markers live here


class SessionState(Enum):
    IDLE = "idle"
    RUNNING = "running"
    COMPLETE = "complete"
    ABORTED = "aborted"


@dataclass(frozen=True)
class ModalitySpec:
    name: str
    interval_ms: float
    device: str  # "vna" or a peripheral registry key
    args: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CycleEntry:
    """One row of the per-cycle step list: either a sweep directive
    ("none" | "all") or a peripheral action with keyword args."""

    key: str
    args: dict = field(default_factory=dict)
    sweep: str | None = None  # set iff key == "sweep"


@dataclass
class AcquisitionPlan:
    mode: str  # "sequential" | "parallel"
    duration_ms: float
    grid: FrequencyGrid | None = None
    interval_ms: float | None = None  # sequential cycle interval (optional)
    cycles: int | None = None
    cycle: tuple[CycleEntry, ...] = ()
    modalities: tuple[ModalitySpec, ...] = ()
    sweep_sequence: SweepSequence | None = None
    pin_map: PortPinMap | None = None
    address: str | None = None
    peripherals_doc: dict | None = None
    seed: int | None = None
    raw_document: dict | None = None

    @classmethod
    def from_document(cls, doc: dict) -> "AcquisitionPlan":
        if not isinstance(doc, dict):
            raise ConfigError("plan: document must be a mapping")
        mode = doc.get("mode")
        if mode not in ("sequential", "parallel"):
            raise ConfigError(f"plan: mode must be sequential or parallel, got {mode!r}")
        try:
            duration_ms = float(doc["duration_ms"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("plan: duration_ms must be a positive number") from None
        if duration_ms <= 0:
            raise ConfigError("plan: duration_ms must be positive")

        grid = None
        if "grid" in doc:
            g = doc["grid"]
            try:
                grid = FrequencyGrid(float(g["start_hz"]), float(g["stop_hz"]),
                                     int(g["n_points"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"plan: bad grid: {exc}") from exc

        pin_map = load_pin_map(doc["pin_map"]) if "pin_map" in doc else None
        sweep_sequence = None
        if "sweep_sequence" in doc:
            sweep_sequence = load_sequence(doc["sweep_sequence"], pin_map)

        cycle: list[CycleEntry] = []
        if "cycle" in doc:
            if not isinstance(doc["cycle"], dict):
                raise ConfigError("plan: cycle must be a mapping of step entries")
            for key, value in doc["cycle"].items():
                if key == "sweep":
                    if value not in ("none", "all"):
                        raise ConfigError(f"plan: cycle sweep must be 'none' or 'all', got {value!r}")
                    cycle.append(CycleEntry(key="sweep", sweep=value))
                else:
                    if not isinstance(value, dict):
                        raise ConfigError(f"plan: cycle [{key}]: args must be a mapping")
                    cycle.append(CycleEntry(key=key, args=dict(value)))

        modalities: list[ModalitySpec] = []
        if "modalities" in doc:
            if not isinstance(doc["modalities"], dict):
                raise ConfigError("plan: modalities must be a mapping")
            for name, spec in doc["modalities"].items():
                try:
                    interval = float(spec["interval_ms"])
                    device = str(spec["device"])
                except (KeyError, TypeError, ValueError):
                    raise ConfigError(f"plan: modality [{name}] needs interval_ms and device") from None
                if interval <= 0:
                    raise ConfigError(f"plan: modality [{name}]: interval must be positive")
                modalities.append(ModalitySpec(name=name, interval_ms=interval, device=device,
                                               args=dict(spec.get("args", {}))))

        interval_ms = doc.get("interval_ms")
        if interval_ms is not None:
            interval_ms = float(interval_ms)
            if interval_ms <= 0:
                raise ConfigError("plan: interval_ms must be positive")
        cycles = doc.get("cycles")
        if cycles is not None:
            cycles = int(cycles)
            if cycles < 1:
                raise ConfigError("plan: cycles must be >= 1")

        return cls(mode=mode, duration_ms=duration_ms, grid=grid,
                   interval_ms=interval_ms, cycles=cycles, cycle=tuple(cycle),
                   modalities=tuple(modalities), sweep_sequence=sweep_sequence,
                   pin_map=pin_map, address=doc.get("address"),
                   peripherals_doc=doc.get("peripherals"), seed=doc.get("seed"),
                   raw_document=doc)

    @classmethod
    def from_json(cls, text: str) -> "AcquisitionPlan":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"plan: bad JSON: {exc}") from exc
        return cls.from_document(doc)

    def target_intervals(self) -> dict[str, float]:
        if self.mode == "parallel":
            return {m.name: m.interval_ms for m in self.modalities}
        return {} if self.interval_ms is None else {"cycle": self.interval_ms}


@dataclass
class DeviceSet:
    clock: SharedClock = field(default_factory=SharedClock)
    vna: VnaClient | None = None
    fabric: SwitchFabric | None = None
    peripherals: dict[str, Peripheral] = field(default_factory=dict)
    extra_vnas: dict[str, VnaClient] = field(default_factory=dict)

    def vna_for(self, device: str) -> VnaClient | None:
        if device == "vna":
            return self.vna
        return self.extra_vnas.get(device)


class Session:
    """Owns the per-modality sample buffers and the live-stream taps."""

    def __init__(self, plan: AcquisitionPlan, clock: SharedClock):
        self.id = uuid.uuid4().hex[:12]
        self.plan = plan
        self.clock = clock
        self.state = SessionState.IDLE
        self.buffers: dict[str, list[TimestampedSample]] = {}
        self.partial = False
        self.stop_event = threading.Event()
        self._lock = threading.Lock()
        self._taps: list[Queue] = []
        self._last_t: dict[str, float] = {}

    def append(self, modality: str, t_ms: float, payload) -> TimestampedSample:
        with self._lock:
            buf = self.buffers.setdefault(modality, [])
            if len(buf) >= MAX_BUFFER_SAMPLES:
                raise AcquisitionError(f"buffer overflow on modality {modality!r}")
            last = self._last_t.get(modality)
            if last is not None and t_ms <= last:
                t_ms = last + 1e-6  # clock ties: keep per-modality timestamps strict
            self._last_t[modality] = t_ms
            sample = TimestampedSample(t_ms=t_ms, modality=modality, payload=payload)
            buf.append(sample)
            taps = list(self._taps)
        for tap in taps:
            try:
                tap.put_nowait(sample)
            except Full:
                pass  # slow consumers lose samples, never block acquisition
        return sample

    def subscribe(self, maxsize: int = 1024) -> Queue:
        tap: Queue = Queue(maxsize=maxsize)
        with self._lock:
            self._taps.append(tap)
        return tap

    def unsubscribe(self, tap: Queue):
        with self._lock:
            if tap in self._taps:
                self._taps.remove(tap)

    def finish(self, state: SessionState):
        self.state = state
        with self._lock:
            taps = list(self._taps)
        for tap in taps:
            try:
                tap.put_nowait(None)  # terminal event
            except Full:
                pass

    def sample_counts(self, data_only: bool = False) -> dict[str, int]:
        out = {}
        for name, buf in self.buffers.items():
            if data_only:
                out[name] = sum(1 for s in buf
                                if not isinstance(s.payload, (GapMarker, ErrorMarker)))
            else:
                out[name] = len(buf)
        return out


# --------------------------------------------------------------------------
# Scheduling


def build_tick_schedule(interval_ms: float, duration_ms: float,
                        start_ms: float = 0.0) -> list[float]:
    """Absolute deadlines start + k*T for k = 0 .. floor(duration/T) - 1."""
    if interval_ms <= 0:
        raise AcquisitionError(f"interval must be positive, got {interval_ms}")
    if duration_ms < interval_ms:
        raise AcquisitionError(
            f"duration {duration_ms} ms shorter than interval {interval_ms} ms")
    n_ticks = int(duration_ms // interval_ms)
    return [start_ms + k * interval_ms for k in range(n_ticks)]




# --------------------------------------------------------------------------
# Validation


def validate_plan(plan: AcquisitionPlan, devices: DeviceSet) -> list[str]:
    """Returns the full list of violations (empty == valid)."""
    errors: list[str] = []

    min_sweep_ms = None
    if devices.vna is not None:
        try:
            min_sweep_ms = devices.vna.min_sweep_time_s() * 1000.0
        except Exception as exc:
            errors.append(f"cannot query minimum sweep time: {exc}")

    uses_rf = False
    if plan.mode == "sequential":
        if not plan.cycle:
            errors.append("sequential plan has no cycle steps")
        uses_rf = any(e.key == "sweep" and e.sweep == "all" for e in plan.cycle)
        if uses_rf and plan.sweep_sequence is None:
            errors.append("cycle sweeps 'all' but no sweep_sequence is configured")
        if uses_rf and devices.vna is None:
            errors.append("cycle sweeps 'all' but no VNA is connected")
        if plan.interval_ms is not None and plan.duration_ms < plan.interval_ms:
            errors.append("duration_ms shorter than interval_ms")
        if plan.interval_ms is None and plan.cycles is None:
            errors.append("sequential plan needs interval_ms or cycles")
        for entry in plan.cycle:
            if entry.key != "sweep" and entry.key not in devices.peripherals:
                errors.append(f"cycle references unknown peripheral {entry.key!r}")
        if uses_rf and plan.interval_ms is not None and min_sweep_ms is not None:
            if plan.interval_ms < min_sweep_ms:
                errors.append(
                    f"sampling interval {plan.interval_ms} ms is below the minimum"
                    f" achievable sweep time {min_sweep_ms} ms")
    elif plan.mode == "parallel":
        if not plan.modalities:
            errors.append("parallel plan has no modalities")
        seen_devices: dict[str, str] = {}
        for m in plan.modalities:
            if plan.duration_ms < m.interval_ms:
                errors.append(f"modality [{m.name}]: duration shorter than interval")
            if m.device in seen_devices:
                errors.append(
                    f"device contention: {m.device!r} bound to both"
                    f" [{seen_devices[m.device]}] and [{m.name}]")
            seen_devices[m.device] = m.name
            if m.device == "vna" or m.device in devices.extra_vnas:
                uses_rf = True
                if devices.vna_for(m.device) is None:
                    errors.append(f"modality [{m.name}]: no VNA connected as {m.device!r}")
                elif min_sweep_ms is not None and m.interval_ms < min_sweep_ms:
                    errors.append(
                        f"modality [{m.name}]: sampling interval {m.interval_ms} ms is"
                        f" below the minimum achievable sweep time {min_sweep_ms} ms")
            elif m.device not in devices.peripherals:
                errors.append(f"modality [{m.name}]: unknown device {m.device!r}")
    else:
        errors.append(f"unknown mode {plan.mode!r}")

    if uses_rf and plan.grid is None:
        errors.append("RF acquisition requires a frequency grid")
    return errors


def ensure_valid(plan: AcquisitionPlan, devices: DeviceSet):
    violations = validate_plan(plan, devices)
    if violations:
        raise PlanValidationError(violations)


# --------------------------------------------------------------------------
# Sequential runner


def _run_sweep_all(plan: AcquisitionPlan, devices: DeviceSet, session: Session):
    vna = devices.vna
    assert vna is not None and plan.sweep_sequence is not None
    for step_id, tx, rx in plan.sweep_sequence:
        if devices.fabric is not None:
            devices.fabric.select_path(tx, rx)
        t = devices.clock.now_ms()
        trace = vna.trigger_and_read(path=(tx, rx))
        session.append("s21", t, TraceSample(trace=trace, step_id=step_id))


def run_sequential(plan: AcquisitionPlan, devices: DeviceSet,
                   session: Session | None = None) -> Session:
    if plan.mode != "sequential":
        raise AcquisitionError(f"run_sequential called with mode {plan.mode!r}")
    ensure_valid(plan, devices)
    session = session or Session(plan, devices.clock)
    session.state = SessionState.RUNNING

    if devices.vna is not None and plan.grid is not None:
        devices.vna.configure_sweep(plan.grid)

    t0 = devices.clock.monotonic_ms()
    deadlines = None
    if plan.interval_ms is not None:
        deadlines = build_tick_schedule(plan.interval_ms, plan.duration_ms, t0)
        n_cycles = len(deadlines)
        if plan.cycles is not None:
            n_cycles = min(n_cycles, plan.cycles)
    else:
        n_cycles = plan.cycles

    state = SessionState.COMPLETE
    k = 0
    while k < n_cycles:
        if session.stop_event.is_set():
            session.partial = True
            break
        if deadlines is not None:
            devices.clock.sleep_until(deadlines[k])
        try:
            for entry in plan.cycle:
                if entry.key == "sweep":
                    if entry.sweep == "all":
                        _run_sweep_all(plan, devices, session)
                else:
                    peripheral = devices.peripherals[entry.key]
                    if peripheral.kind == "actuator":
                        try:
                            event = peripheral.actuate(**entry.args)
                        except Exception as exc:
                            # Position integrity lost: the whole session is bad.
                            session.append(entry.key, devices.clock.now_ms(),
                                           ErrorMarker(f"actuator failure: {exc}"))
                            session.finish(SessionState.ABORTED)
                            return session
                        if isinstance(event, TimestampedSample):
                            session.append(entry.key, event.t_ms, event.payload)
                        else:
                            session.append(entry.key, devices.clock.now_ms(), event)
                    else:
                        t = devices.clock.now_ms()
                        try:
                            session.append(entry.key, t, peripheral.sample())
                        except SamplingError as exc:
                            session.append(entry.key, t, ErrorMarker(str(exc)))
        except AcquisitionError as exc:
            # VNA failure aborts this cycle only; the schedule stays anchored.
            session.append(EVENT_MODALITY, devices.clock.now_ms(),
                           ErrorMarker(f"cycle {k}: {exc}"))
            session.partial = True

        k += 1
        if deadlines is not None and k < n_cycles:
            now = devices.clock.monotonic_ms()
            skipped = 0
            while k < n_cycles and deadlines[k] < now:
                skipped += 1
                k += 1
            if skipped:
                session.append(EVENT_MODALITY, devices.clock.now_ms(),
                               GapMarker(missed_ticks=skipped))
                session.partial = True

    session.finish(state)
    return session


# --------------------------------------------------------------------------
# Parallel runner


def _modality_worker(plan: AcquisitionPlan, devices: DeviceSet, session: Session,
                     spec: ModalitySpec):
    try:
        _modality_loop(plan, devices, session, spec)
    finally:
        devices.clock.detach_sleeper()


def _modality_loop(plan: AcquisitionPlan, devices: DeviceSet, session: Session,
                   spec: ModalitySpec):
    clock = devices.clock
    vna = devices.vna_for(spec.device)
    peripheral = devices.peripherals.get(spec.device)
    deadlines = build_tick_schedule(spec.interval_ms, plan.duration_ms,
                                    clock.monotonic_ms())
    k = 0
    while k < len(deadlines):
        if session.stop_event.is_set():
            session.partial = True
            return
        clock.sleep_until(deadlines[k])
        t = clock.now_ms()
        try:
            if vna is not None:
                if plan.sweep_sequence is not None:
                    for step_id, tx, rx in plan.sweep_sequence:
                        if devices.fabric is not None:
                            devices.fabric.select_path(tx, rx)
                        trace = vna.trigger_and_read(path=(tx, rx))
                        session.append(spec.name, clock.now_ms(),
                                       TraceSample(trace=trace, step_id=step_id))
                else:
                    trace = vna.trigger_and_read()
                    session.append(spec.name, t, TraceSample(trace=trace))
            elif peripheral is not None and peripheral.kind == "actuator":
                event = peripheral.actuate(**spec.args)
                if isinstance(event, TimestampedSample):
                    session.append(spec.name, event.t_ms, event.payload)
                else:
                    session.append(spec.name, t, event)
            elif peripheral is not None:
                session.append(spec.name, t, peripheral.sample())
            else:
                raise AcquisitionError(f"modality {spec.name!r}: no device")
        except Exception as exc:
            # Record the failure and terminate this loop; others continue.
            session.append(spec.name, clock.now_ms(), ErrorMarker(str(exc)))
            session.partial = True
            return
        k += 1
        now = clock.monotonic_ms()
        skipped = 0
        while k < len(deadlines) and deadlines[k] < now:
            skipped += 1
            k += 1
        if skipped:
            session.append(spec.name, clock.now_ms(), GapMarker(missed_ticks=skipped))
            session.partial = True


def run_parallel(plan: AcquisitionPlan, devices: DeviceSet,
                 session: Session | None = None) -> Session:
    if plan.mode != "parallel":
        raise AcquisitionError(f"run_parallel called with mode {plan.mode!r}")
    ensure_valid(plan, devices)
    session = session or Session(plan, devices.clock)
    session.state = SessionState.RUNNING

    rf_specs = [m for m in plan.modalities if devices.vna_for(m.device) is not None]
    for spec in rf_specs:
        if plan.grid is not None:
            devices.vna_for(spec.device).configure_sweep(plan.grid)

    workers = [
        threading.Thread(target=_modality_worker, args=(plan, devices, session, spec),
                         name=f"modality-{spec.name}", daemon=True)
        for spec in plan.modalities
    ]
    # A short GIL switch interval keeps one thread's work from delaying the
    # others' tick wakeups by the default 5 ms quantum.
    previous_switch = sys.getswitchinterval()
    sys.setswitchinterval(0.001)
    for _ in workers:
        devices.clock.attach_sleeper()
    try:
        for w in workers:
            w.start()
        for w in workers:
            w.join()
    finally:
        sys.setswitchinterval(previous_switch)
    session.finish(SessionState.COMPLETE)
    return session


def run_plan(plan: AcquisitionPlan, devices: DeviceSet,
             session: Session | None = None) -> Session:
    if plan.mode == "sequential":
        return run_sequential(plan, devices, session)
    return run_parallel(plan, devices, session)
