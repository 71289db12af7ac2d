"""RF switch fabric: port-label -> GPIO pin maps and ordered sweep sequences.

Config documents are JSON with the same structure as the registry examples:
pin maps are {label: [pin, ...]}, sequences are {"1": [tx, rx], ...}.
Maps and sequences are immutable after load and freely shareable; pin
application is serialized through the owning acquisition worker.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

from .errors import ConfigError

_PIN_RE = re.compile(r"^GP\d+$")

DEFAULT_SETTLE_S = 0.005


@dataclass(frozen=True)
class PortPinMap:
    mapping: dict[str, frozenset[str]]

    def pins_for(self, label: str) -> frozenset[str]:
        try:
            return self.mapping[label]
        except KeyError:
            raise ConfigError(f"unknown port label {label!r}") from None

    def all_pins(self) -> frozenset[str]:
        out: set[str] = set()
        for pins in self.mapping.values():
            out |= pins
        return frozenset(out)


@dataclass(frozen=True)
class SweepSequence:
    steps: tuple[tuple[int, str, str], ...]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def load_pin_map(document: dict) -> PortPinMap:
    """Validate a {label: [pin, ...]} document (Listing-3-shaped)."""
    if not isinstance(document, dict):
        raise ConfigError("pin map must be a mapping of label -> pin list")
    mapping: dict[str, frozenset[str]] = {}
    for label, pins in document.items():
        if not isinstance(label, str) or not label:
            raise ConfigError(f"pin map: bad label {label!r}")
        if label in mapping:
            raise ConfigError(f"pin map: duplicate label {label!r}")
        if not isinstance(pins, (list, tuple)):
            raise ConfigError(f"pin map [{label}]: pins must be an array")
        for pin in pins:
            if not isinstance(pin, str) or not _PIN_RE.match(pin):
                raise ConfigError(f"pin map [{label}]: bad pin name {pin!r} (want GP<digits>)")
        mapping[label] = frozenset(pins)
    return PortPinMap(mapping=mapping)


def resolve_path_pins(pin_map: PortPinMap, tx: str, rx: str) -> frozenset[str]:
    """Union of the pins for both labels; everything else is to be driven low."""
    return pin_map.pins_for(tx) | pin_map.pins_for(rx)


def load_sequence(document: dict, pin_map: PortPinMap | None = None) -> SweepSequence:
    """Load an ordered {"<step id>": [tx, rx]} document, sorted by numeric key.

    If a pin map is given, every label is resolved at load time.
    """
    if not isinstance(document, dict):
        raise ConfigError("sweep sequence must be a mapping")
    if not document:
        raise ConfigError("sweep sequence is empty")
    steps = []
    for key, pair in document.items():
        if not (isinstance(key, str) and key.isdigit() and int(key) > 0):
            raise ConfigError(f"sweep sequence: key {key!r} is not a positive integer")
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2
                and all(isinstance(x, str) for x in pair)):
            raise ConfigError(f"sweep sequence [{key}]: want a [tx, rx] pair")
        steps.append((int(key), pair[0], pair[1]))
    steps.sort(key=lambda s: s[0])
    ids = [s[0] for s in steps]
    if len(set(ids)) != len(ids):
        raise ConfigError("sweep sequence: duplicate step ids")
    seq = SweepSequence(steps=tuple(steps))
    if pin_map is not None:
        for _, tx, rx in seq:
            resolve_path_pins(pin_map, tx, rx)
    return seq


class PinDriver:
    """Boundary to the GPIO hardware. The simulated driver just records state."""

    def apply(self, high_pins: frozenset[str]):  # pragma: no cover - interface
        raise NotImplementedError


@dataclass
class SimPinDriver(PinDriver):
    """Records the currently-high pin set; stateless application (all
    unmentioned pins low on every change)."""

    state: frozenset[str] = frozenset()
    history: list[frozenset[str]] = field(default_factory=list)

    def apply(self, high_pins: frozenset[str]):
        self.state = frozenset(high_pins)
        self.history.append(self.state)


class SwitchFabric:
    """Applies paths: set the pin union high, everything else low, then settle."""

    def __init__(self, pin_map: PortPinMap, driver: PinDriver,
                 settle_s: float = DEFAULT_SETTLE_S):
        self.pin_map = pin_map
        self.driver = driver
        self.settle_s = settle_s

    def select_path(self, tx: str, rx: str) -> frozenset[str]:
        pins = resolve_path_pins(self.pin_map, tx, rx)
        self.driver.apply(pins)
        if self.settle_s > 0:
            time.sleep(self.settle_s)
        return pins
