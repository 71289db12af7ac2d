import pytest

from mpada.errors import ConfigError
from mpada.switching import (SimPinDriver, SwitchFabric, load_pin_map,
                             load_sequence, resolve_path_pins)

PIN_MAP_DOC = {
    "TX1": [], "TX2": ["GP0"], "TX3": ["GP1"],
    "RX1": [], "RX2": ["GP2"], "RX3": ["GP3"],
    "TXcal": ["GP0", "GP1"], "RXcal": ["GP2", "GP3"],
}

SEQUENCE_DOC = {"1": ["TX1", "RX1"], "2": ["TX2", "RX2"], "3": ["TX3", "RX3"]}


class TestPinMap:
    def test_standard_document(self):
        pm = load_pin_map(PIN_MAP_DOC)
        assert pm.pins_for("TX1") == frozenset()
        assert pm.pins_for("TX2") == {"GP0"}
        assert pm.pins_for("TXcal") == {"GP0", "GP1"}
        assert pm.pins_for("RXcal") == {"GP2", "GP3"}

    def test_empty_map_is_valid(self):
        assert load_pin_map({}).mapping == {}

    def test_bad_pin_name(self):
        with pytest.raises(ConfigError, match="TX1"):
            load_pin_map({"TX1": ["bad-pin"]})

    def test_resolve_union(self):
        pm = load_pin_map(PIN_MAP_DOC)
        assert resolve_path_pins(pm, "TX2", "RX2") == {"GP0", "GP2"}
        assert resolve_path_pins(pm, "TX1", "RX1") == frozenset()
        assert resolve_path_pins(pm, "TXcal", "RXcal") == {"GP0", "GP1", "GP2", "GP3"}

    def test_resolve_commutes(self):
        pm = load_pin_map(PIN_MAP_DOC)
        for a, b in [("TX2", "RX3"), ("TXcal", "RX1")]:
            assert resolve_path_pins(pm, a, b) == resolve_path_pins(pm, b, a)

    def test_unknown_label(self):
        pm = load_pin_map(PIN_MAP_DOC)
        with pytest.raises(ConfigError, match="TX9"):
            resolve_path_pins(pm, "TX9", "RX1")


class TestSequence:
    def test_standard_document(self):
        seq = load_sequence(SEQUENCE_DOC)
        assert seq.steps == ((1, "TX1", "RX1"), (2, "TX2", "RX2"), (3, "TX3", "RX3"))

    def test_numeric_sort(self):
        seq = load_sequence({"2": ["TX2", "RX2"], "1": ["TX1", "RX1"]})
        assert [s[0] for s in seq] == [1, 2]

    def test_arity_error(self):
        with pytest.raises(ConfigError, match="1"):
            load_sequence({"1": ["TX1"]})

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            load_sequence({})

    def test_non_numeric_key(self):
        with pytest.raises(ConfigError):
            load_sequence({"a": ["TX1", "RX1"]})

    def test_labels_checked_against_map(self):
        pm = load_pin_map(PIN_MAP_DOC)
        load_sequence(SEQUENCE_DOC, pm)  # all resolvable
        with pytest.raises(ConfigError):
            load_sequence({"1": ["TX1", "RX9"]}, pm)


class TestFabric:
    def test_stateless_application_resets_pins(self):
        pm = load_pin_map(PIN_MAP_DOC)
        driver = SimPinDriver()
        fabric = SwitchFabric(pm, driver, settle_s=0.0)
        fabric.select_path("TXcal", "RXcal")
        assert driver.state == {"GP0", "GP1", "GP2", "GP3"}
        fabric.select_path("TX1", "RX1")
        assert driver.state == frozenset()  # empty-set path is a full reset
