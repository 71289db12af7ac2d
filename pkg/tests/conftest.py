import pytest

from mpada.scpi import parse_resource
from mpada.simulator import IdealThrough, LoopScenario, SimVna, SimVnaServer
from mpada.transport import ScpiConnection
from mpada.vna import VnaClient


@pytest.fixture
def sim_server():
    server = SimVnaServer(SimVna(scenario=IdealThrough()))
    server.start()
    yield server
    server.stop()


@pytest.fixture
def sim_client(sim_server):
    conn = ScpiConnection(parse_resource(sim_server.address_string))
    yield VnaClient(conn=conn)
    conn.close()


@pytest.fixture
def loop_server():
    server = SimVnaServer(SimVna(scenario=LoopScenario()))
    server.start()
    yield server
    server.stop()


def make_loop_plan_doc(duration_ms=2000, rf_interval=100, flux_interval=50,
                       address="sim:loop"):
    return {
        "mode": "parallel",
        "address": address,
        "duration_ms": duration_ms,
        "grid": {"start_hz": 34e6, "stop_hz": 34e6, "n_points": 1},
        "peripherals": {
            "hall": {"enable": True, "module": "mpada.sim_peripherals",
                     "object": "SimHall", "label": "Hall flux sensor"},
        },
        "modalities": {
            "s21": {"interval_ms": rf_interval, "device": "vna"},
            "flux": {"interval_ms": flux_interval, "device": "hall"},
        },
    }
