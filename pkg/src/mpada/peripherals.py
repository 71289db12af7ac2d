"""Peripheral registry: non-RF sensors and actuators loaded from a config file.

The registry document maps a key to {enable, module, object, label}; only
enabled entries are instantiated. `module`/`object` resolve through a small
alias table for the bundled simulated backends, then through a normal import.
Each instantiated peripheral is owned by exactly one acquisition worker.
"""

from __future__ import annotations

import importlib
import json
import math
from dataclasses import dataclass

import yaml

from .errors import ConfigError, SamplingError
from .samples import AngleSample, MagneticFluxSample, TimestampedSample

# Hardware names from typical registry files mapped onto the bundled
# simulated backends (no OS devices needed).
_ALIASES = {
    ("rp2040_u2if_interface.core", "RP2040"): ("mpada.sim_peripherals", "SerialBridge"),
    ("tof_rp2040_u2if.vl53l0x.main", "VL53L0X"): ("mpada.sim_peripherals", "SerialBridge"),
    ("generic_stepper.main", "Stepper"): ("mpada.sim_peripherals", "SimStepper"),
}


@dataclass(frozen=True)
class PeripheralDescriptor:
    key: str
    enable: bool
    module: str
    object: str
    label: str


class Peripheral:
    """Base class; subclasses set `kind` and implement sample() or actuate()."""

    kind = "sensor"  # "sensor" | "actuator" | "bridge"

    def __init__(self, key: str = "", label: str = "", context: dict | None = None):
        self.key = key
        self.label = label
        self.context = context or {}

    def sample(self):
        raise SamplingError(f"peripheral {self.key!r} does not provide sampling")

    def actuate(self, **kwargs):
        raise SamplingError(f"peripheral {self.key!r} does not provide actuation")


def parse_registry_document(text: str) -> dict:
    """Parse a registry config given as JSON or YAML text; duplicate top-level
    keys are an error (JSON parse detects them; YAML follows suit)."""

    def no_dupes(pairs):
        keys = [k for k, _ in pairs]
        if len(set(keys)) != len(keys):
            raise ConfigError("registry: duplicate key")
        return dict(pairs)

    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text, object_pairs_hook=no_dupes)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"registry: bad JSON: {exc}") from exc

    class _StrictLoader(yaml.SafeLoader):
        pass

    def _strict_map(loader, node):
        mapping = {}
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node)
            if key in mapping:
                raise ConfigError(f"registry: duplicate key {key!r}")
            mapping[key] = loader.construct_object(value_node)
        return mapping

    _StrictLoader.add_constructor(
        yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _strict_map)
    try:
        doc = yaml.load(text, Loader=_StrictLoader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"registry: bad YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("registry: document must be a mapping")
    return doc


def parse_descriptors(document: dict) -> list[PeripheralDescriptor]:
    if not isinstance(document, dict):
        raise ConfigError("registry: document must be a mapping")
    out = []
    for key, record in document.items():
        if not isinstance(record, dict):
            raise ConfigError(f"registry [{key}]: record must be a mapping")
        missing = {"enable", "module", "object", "label"} - set(record)
        if missing:
            raise ConfigError(f"registry [{key}]: missing fields {sorted(missing)}")
        if not isinstance(record["enable"], bool):
            raise ConfigError(f"registry [{key}]: enable must be a boolean")
        out.append(PeripheralDescriptor(
            key=key, enable=record["enable"], module=str(record["module"]),
            object=str(record["object"]), label=str(record["label"])))
    return out


def _resolve_class(module: str, object_name: str):
    module, object_name = _ALIASES.get((module, object_name), (module, object_name))
    try:
        mod = importlib.import_module(module)
    except ImportError as exc:
        raise ConfigError(f"registry: cannot import module {module!r}: {exc}") from exc
    try:
        return getattr(mod, object_name)
    except AttributeError:
        raise ConfigError(f"registry: module {module!r} has no object {object_name!r}") from None


def load_registry(document, context: dict | None = None) -> dict[str, Peripheral]:
    """Instantiate exactly the enabled descriptors; returns key -> peripheral."""
    if isinstance(document, str):
        document = parse_registry_document(document)
    peripherals: dict[str, Peripheral] = {}
    for desc in parse_descriptors(document):
        if not desc.enable:
            continue
        cls = _resolve_class(desc.module, desc.object)
        peripherals[desc.key] = cls(key=desc.key, label=desc.label, context=dict(context or {}))
    return peripherals


def stepper_advance(stepper: Peripheral, n_steps: int) -> TimestampedSample:
    """Pulse the stepper; returns the actuation event with RTC timestamp and
    the new cumulative position."""
    if not isinstance(n_steps, int) or n_steps < 1:
        raise ConfigError(f"n_steps must be a positive integer, got {n_steps!r}")
    return stepper.actuate(n_steps=n_steps)


def read_flux(hall: Peripheral) -> MagneticFluxSample:
    sample = hall.sample()
    if not isinstance(sample, MagneticFluxSample):
        raise SamplingError(f"peripheral {hall.key!r} did not return a flux sample")
    return sample


def flux_to_angle(b: MagneticFluxSample) -> AngleSample:
    """In-plane angle from the flux vector: atan2(By, Bx) mapped into [0, 360)."""
    if b.bx == 0.0 and b.by == 0.0:
        raise SamplingError("degenerate field: Bx == By == 0")
    theta = math.degrees(math.atan2(b.by, b.bx)) % 360.0
    if theta >= 360.0:  # guard against 359.9999... % rounding to 360.0
        theta = 0.0
    return AngleSample(theta_deg=theta)
