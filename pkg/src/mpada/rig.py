"""Builds a DeviceSet for a plan: either connects to a real SCPI address or
spins up the embedded simulator with matched peripherals.

Address forms:
    TCPIP0::<host>::<port>::SOCKET   raw-socket SCPI instrument
    sim:ideal | sim:loop | sim:tomography[:<position>]
                                     embedded simulator on an ephemeral port
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .clock import SharedClock
from .engine import AcquisitionPlan, DeviceSet
from .errors import ConfigError
from .peripherals import load_registry
from .scpi import parse_resource
from .simulator import (IdealThrough, LoopScenario, SimVna, SimVnaServer,
                        TomographyScenario)
from .switching import SimPinDriver, SwitchFabric
from .transport import ScpiConnection
from .vna import VnaClient


@dataclass
class Rig:
    devices: DeviceSet
    scenario: object | None = None
    server: SimVnaServer | None = None
    _closers: list = field(default_factory=list)

    def close(self):
        for closer in self._closers:
            try:
                closer()
            except Exception:
                pass
        if self.server is not None:
            self.server.stop()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _make_scenario(kind: str, params: dict):
    if kind in ("ideal", "thru", "ideal_through"):
        return IdealThrough(**params)
    if kind == "loop":
        return LoopScenario(**params)
    if kind.startswith("tomography"):
        tail = kind.split(":", 1)
        if len(tail) == 2 and "position" not in params:
            params = dict(params, position=tail[1] or None)
        return TomographyScenario(**params)
    raise ConfigError(f"unknown simulator scenario {kind!r}")


def build_rig(plan: AcquisitionPlan, address: str | None = None,
              timeout_s: float = 2.0) -> Rig:
    address = address or plan.address
    clock = SharedClock()
    scenario = None
    server = None
    closers = []

    doc = plan.raw_document or {}
    scenario_params = dict(doc.get("scenario_params", {}))

    if address is None:
        raise ConfigError("no instrument address given (plan 'address' or --address)")

    if address.startswith("sim:") or address == "sim":
        kind = address.split(":", 1)[1] if ":" in address else "ideal"
        scenario = _make_scenario(kind, scenario_params)
        vna_sim = SimVna(scenario=scenario, seed=plan.seed,
                         latency_jitter_ms=float(doc.get("latency_jitter_ms", 0.0)))
        server = SimVnaServer(vna_sim).start()
        resource = parse_resource(server.address_string)
    else:
        resource = parse_resource(address)

    conn = ScpiConnection(resource, timeout_s=timeout_s)
    closers.append(conn.close)
    vna = VnaClient(conn=conn)

    context = {"clock": clock}
    if scenario is not None:
        context["scenario"] = scenario
    peripherals = {}
    if plan.peripherals_doc:
        peripherals = load_registry(plan.peripherals_doc, context=context)

    fabric = None
    if plan.pin_map is not None:
        fabric = SwitchFabric(plan.pin_map, SimPinDriver(), settle_s=0.0)

    devices = DeviceSet(clock=clock, vna=vna, fabric=fabric, peripherals=peripherals)
    return Rig(devices=devices, scenario=scenario, server=server, _closers=closers)


def open_extra_vna(rig: Rig, name: str, timeout_s: float = 2.0) -> VnaClient:
    """Second connection to the same simulator (parallel RF modalities need
    disjoint connections)."""
    if rig.server is None:
        raise ConfigError("extra VNA connections are only supported on the simulator")
    conn = ScpiConnection(parse_resource(rig.server.address_string), timeout_s=timeout_s)
    rig._closers.append(conn.close)
    client = VnaClient(conn=conn)
    rig.devices.extra_vnas[name] = client
    return client
