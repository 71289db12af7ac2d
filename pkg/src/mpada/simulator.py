"""Simulated 2-port VNA (SCPI over TCP) plus the closed-form measurement scenarios.

The SCPI dialect implemented here is the authority for the whole package:
*IDN?, *RST, *OPC?, :SENS:FREQ:STAR/:STOP (set/query), :SENS:SWE:POIN
(set/query), :SENS:SWE:TIME?, :INIT:IMM, :CALC:DATA? SDATA.

Physics is deliberately closed-form so tests have exact oracles:
  - tomography: background(f) + a * exp(j*phi(m)) * exp(-j*2*pi*k*d_p/N)
    (impulse at bin d_p after IFFT, independent of the background)
  - resonant loop: |S21| = k0 * (1 + cos(theta))/2 * L(f), Lorentzian L
    peaking at 34 MHz, with matched Hall flux B0*(cos(theta), sin(theta), z0)
"""

from __future__ import annotations

import math
import random
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .samples import MagneticFluxSample
from .scpi import encode_block
from .vna import FrequencyGrid, encode_trace_values

IDN_STRING = "MPADA,SIMVNA,0,1.0"
DEFAULT_MIN_SWEEP_TIME_S = 0.02
DEFAULT_PORT = 5025


# --------------------------------------------------------------------------
# Scenarios


class Scenario:
    """Computes S21 values for the current instant; shared with sim peripherals."""

    name = "ideal_through"

    def s21(self, grid: FrequencyGrid, t_s: float) -> np.ndarray:
        raise NotImplementedError


class IdealThrough(Scenario):
    """Gain-1 through path: every point is exactly 1+0j."""

    name = "ideal_through"

    def __init__(self, gain: complex = 1.0 + 0.0j):
        self.gain = gain

    def s21(self, grid: FrequencyGrid, t_s: float) -> np.ndarray:
        return np.full(grid.n_points, self.gain, dtype=complex)


@dataclass
class TomographyScenario(Scenario):
    """Rotating phantom with a movable point scatterer at delay bin d_p.

    The stepper peripheral advances `cumulative_steps`; one angle is
    `steps_per_angle` steps and a full revolution is n_angles angles
    (72 angles x 5 steps = 360 steps = one revolution).
    """

    n_angles: int = 72
    steps_per_angle: int = 5
    delay_bins: dict[str, int] = field(default_factory=lambda: {"A": 12, "B": 30, "C": 55})
    position: str | None = None  # None == no phantom
    clutter_amplitude: float = 0.1
    background_db: float = -40.0
    name: str = "tomography"
    cumulative_steps: int = 0

    def __post_init__(self):
        bins = list(self.delay_bins.values())
        if len(set(bins)) != len(bins):
            raise ConfigError("tomography delay bins must be distinct across positions")
        if any(d < 0 for d in bins):
            raise ConfigError("tomography delay bins must be non-negative")
        if self.position is not None and self.position not in self.delay_bins:
            raise ConfigError(f"unknown scatterer position {self.position!r}")

    @property
    def background_linear(self) -> float:
        return 10.0 ** (self.background_db / 20.0)

    @property
    def angle_index(self) -> int:
        return (self.cumulative_steps // self.steps_per_angle) % self.n_angles

    def advance_steps(self, n_steps: int):
        self.cumulative_steps += n_steps

    def s21_for_angle(self, m: int, grid: FrequencyGrid) -> np.ndarray:
        if not 0 <= m < self.n_angles:
            raise ConfigError(f"angle index {m} outside [0, {self.n_angles})")
        n = grid.n_points
        background = np.full(n, self.background_linear, dtype=complex)
        if self.position is None:
            return background
        d = self.delay_bins[self.position]
        if d >= n:
            raise ConfigError(f"delay bin {d} >= n_points {n}")
        k = np.arange(n)
        phase = np.exp(1j * 2.0 * math.pi * m / self.n_angles)
        clutter = self.clutter_amplitude * phase * np.exp(-1j * 2.0 * math.pi * k * d / n)
        return background + clutter

    def s21(self, grid: FrequencyGrid, t_s: float) -> np.ndarray:
        return self.s21_for_angle(self.angle_index, grid)


class OscillatingMotion:
    """theta(t) = center - amplitude*cos(2*pi*t/period); spans [0, 180] by default."""

    def __init__(self, center_deg: float = 90.0, amplitude_deg: float = 90.0,
                 period_s: float = 5.0):
        self.center_deg = center_deg
        self.amplitude_deg = amplitude_deg
        self.period_s = period_s

    def __call__(self, t_s: float) -> float:
        theta = self.center_deg - self.amplitude_deg * math.cos(2.0 * math.pi * t_s / self.period_s)
        return theta % 360.0


class UniformRotation:
    def __init__(self, omega_deg_s: float = 45.0):
        self.omega_deg_s = omega_deg_s

    def __call__(self, t_s: float) -> float:
        return (self.omega_deg_s * t_s) % 360.0


@dataclass
class LoopScenario(Scenario):
    """Resonant TX/RX loop pair plus the Hall ground-truth flux, one shared
    angle trajectory so the two modalities are physically coupled."""

    resonance_hz: float = 34e6
    k0: float = 0.8
    q: float = 20.0
    b0: float = 1.0
    z0: float = 0.2
    motion: Callable[[float], float] = field(default_factory=OscillatingMotion)
    name: str = "loop"
    start_monotonic: float = field(default_factory=time.monotonic)

    def __post_init__(self):
        if not 0.0 < self.k0 <= 1.0:
            raise ConfigError(f"peak coupling k0 must be in (0, 1], got {self.k0}")

    def elapsed_s(self) -> float:
        """Seconds since the scenario epoch; shared by both modalities."""
        return time.monotonic() - self.start_monotonic

    def theta_at(self, t_s: float) -> float:
        return self.motion(t_s) % 360.0

    def line_shape(self, f_hz) -> np.ndarray:
        detune = 2.0 * self.q * (np.asarray(f_hz, dtype=float) - self.resonance_hz) / self.resonance_hz
        return 1.0 / (1.0 + detune ** 2)

    def magnitude(self, theta_deg: float, f_hz: float) -> float:
        coupling = (1.0 + math.cos(math.radians(theta_deg))) / 2.0
        return self.k0 * coupling * float(self.line_shape(f_hz))

    def s21(self, grid: FrequencyGrid, t_s: float) -> np.ndarray:
        theta = self.theta_at(t_s)
        coupling = (1.0 + math.cos(math.radians(theta))) / 2.0
        return (self.k0 * coupling * self.line_shape(grid.frequencies())).astype(complex)

    def flux_at(self, t_s: float) -> MagneticFluxSample:
        theta = math.radians(self.theta_at(t_s))
        return MagneticFluxSample(
            bx=self.b0 * math.cos(theta),
            by=self.b0 * math.sin(theta),
            bz=self.b0 * self.z0,
        )

    def flux_now(self) -> MagneticFluxSample:
        return self.flux_at(self.elapsed_s())


def make_scenario(name: str, **kwargs) -> Scenario:
    table = {
        "ideal": IdealThrough,
        "ideal_through": IdealThrough,
        "thru": IdealThrough,
        "tomography": TomographyScenario,
        "loop": LoopScenario,
    }
    try:
        cls = table[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r} (want one of {sorted(table)})") from None
    return cls(**kwargs)


# --------------------------------------------------------------------------
# SCPI state machine


class SimVna:
    """SCPI request/response state machine for the simulated 2-port VNA.

    State mutations are atomic per message; unknown headers get a SCPI error
    response and never close the connection.
    """

    def __init__(self, scenario: Scenario | None = None,
                 min_sweep_time_s: float = DEFAULT_MIN_SWEEP_TIME_S,
                 latency_jitter_ms: float = 0.0, seed: int | None = None):
        self.scenario = scenario or IdealThrough()
        self.min_sweep_time_s = min_sweep_time_s
        self.latency_jitter_ms = latency_jitter_ms
        self._rng = random.Random(seed)
        self._t0 = time.monotonic()
        self.calibrated = False
        self._reset_state()

    def _reset_state(self):
        self.start_hz = 1e6
        self.stop_hz = 1e9
        self.n_points = 201
        self._last_trace: np.ndarray | None = None

    def _elapsed_s(self) -> float:
        return time.monotonic() - self._t0

    def _grid(self) -> FrequencyGrid:
        return FrequencyGrid(self.start_hz, self.stop_hz, self.n_points)

    def _sweep(self) -> np.ndarray:
        # Loop scenarios carry their own epoch so the Hall peripheral and the
        # VNA sample the same angle trajectory.
        if hasattr(self.scenario, "elapsed_s"):
            t_s = self.scenario.elapsed_s()
        else:
            t_s = self._elapsed_s()
        return self.scenario.s21(self._grid(), t_s)

    def respond(self, line: str) -> bytes:
        """Handle one newline-stripped message; returns response bytes
        (may be empty: plain commands produce no output)."""
        if self.latency_jitter_ms > 0:
            time.sleep(self._rng.uniform(0.0, self.latency_jitter_ms) / 1000.0)
        line = line.strip()
        if not line:
            return b""
        parts = line.split(None, 1)
        header = parts[0].upper()
        arg = parts[1].strip() if len(parts) > 1 else None

        if header == "*IDN?":
            return (IDN_STRING + "\n").encode()
        if header == "*RST":
            self._reset_state()
            return b""
        if header == "*OPC?":
            return b"1\n"
        if header == ":SENS:FREQ:STAR?":
            return f"{self.start_hz:.10g}\n".encode()
        if header == ":SENS:FREQ:STOP?":
            return f"{self.stop_hz:.10g}\n".encode()
        if header == ":SENS:SWE:POIN?":
            return f"{self.n_points}\n".encode()
        if header == ":SENS:SWE:TIME?":
            return f"{self.min_sweep_time_s:.10g}\n".encode()
        if header == ":SENS:FREQ:STAR":
            value = self._parse_float(arg)
            if value is None or value <= 0:
                return b"-222,\"Data out of range\"\n"
            self.start_hz = value
            return b""
        if header == ":SENS:FREQ:STOP":
            value = self._parse_float(arg)
            if value is None or value <= 0:
                return b"-222,\"Data out of range\"\n"
            self.stop_hz = value
            return b""
        if header == ":SENS:SWE:POIN":
            if arg is None or not arg.isdigit() or not 1 <= int(arg) <= 100001:
                return b"-222,\"Data out of range\"\n"
            self.n_points = int(arg)
            return b""
        if header == ":INIT:IMM":
            try:
                self._last_trace = self._sweep()
            except Exception:
                return b"-221,\"Settings conflict\"\n"
            return b""
        if header == ":CALC:DATA?" and arg is not None and arg.upper() == "SDATA":
            try:
                trace = self._last_trace if self._last_trace is not None else self._sweep()
            except Exception:
                return b"-221,\"Settings conflict\"\n"
            return encode_block(encode_trace_values(trace)) + b"\n"
        return b"-113,\"Undefined header\"\n"

    @staticmethod
    def _parse_float(arg: str | None) -> float | None:
        if arg is None:
            return None
        try:
            value = float(arg)
        except ValueError:
            return None
        return value if math.isfinite(value) else None


# --------------------------------------------------------------------------
# TCP server


class SimVnaServer:
    """One-client-at-a-time SCPI TCP server (real VNAs behave this way);
    further connect attempts queue in the listen backlog."""

    def __init__(self, vna: SimVna | None = None, host: str = "127.0.0.1", port: int = 0):
        self.vna = vna or SimVna()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(8)
        self.host, self.port = self._listener.getsockname()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    @property
    def address_string(self) -> str:
        return f"TCPIP0::{self.host}::{self.port}::SOCKET"

    def start(self) -> "SimVnaServer":
        self._thread = threading.Thread(target=self._serve, daemon=True,
                                        name="sim-vna-server")
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def _serve(self):
        while not self._stop.is_set():
            try:
                client, _ = self._listener.accept()
            except OSError:
                return
            with client:
                client.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                self._handle_client(client)

    def _handle_client(self, client: socket.socket):
        buf = b""
        client.settimeout(0.2)
        while not self._stop.is_set():
            while b"\n" in buf:
                line, buf = buf.split(b"\n", 1)
                response = self.vna.respond(line.decode("ascii", errors="replace"))
                if response:
                    try:
                        client.sendall(response)
                    except OSError:
                        return
            try:
                chunk = client.recv(65536)
            except socket.timeout:
                continue
            except OSError:
                return
            if not chunk:
                return
            buf += chunk
