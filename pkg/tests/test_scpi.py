import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpada.errors import ScpiParseError
from mpada.scpi import (MessageKind, encode_block, frame_command, parse_block,
                        parse_command, parse_resource)


class TestParseResource:
    def test_ipv4(self):
        addr = parse_resource("TCPIP0::192.168.1.5::5025::SOCKET")
        assert addr.host == "192.168.1.5"
        assert addr.port == 5025

    def test_hostname(self):
        addr = parse_resource("TCPIP0::localhost::5025::SOCKET")
        assert addr.host == "localhost"
        assert addr.port == 5025

    def test_port_out_of_range(self):
        with pytest.raises(ScpiParseError, match="port"):
            parse_resource("TCPIP0::x::99999::SOCKET")

    def test_case_insensitive_tokens(self):
        addr = parse_resource("tcpip0::vna.lab::5025::socket")
        assert addr.host == "vna.lab"

    @pytest.mark.parametrize("bad", [
        "", "TCPIP0::host::5025", "GPIB0::5::INSTR", "TCPIP0::::5025::SOCKET",
        "TCPIP0::h::0::SOCKET", "TCPIP0::h::abc::SOCKET",
    ])
    def test_malformed(self, bad):
        with pytest.raises(ScpiParseError):
            parse_resource(bad)


class TestFrameCommand:
    def test_query(self):
        msg = frame_command("*IDN?")
        assert msg.raw == b"*IDN?\n"
        assert msg.kind == MessageKind.QUERY

    def test_command(self):
        msg = frame_command(":SENS:SWE:POIN 101")
        assert msg.raw == b":SENS:SWE:POIN 101\n"
        assert msg.kind == MessageKind.COMMAND

    def test_embedded_newline_rejected(self):
        with pytest.raises(ScpiParseError):
            frame_command("a\nb")

    def test_query_with_argument(self):
        assert frame_command(":CALC:DATA? SDATA").kind == MessageKind.QUERY

    def test_single_terminator_and_roundtrip(self):
        msg = frame_command(":SENS:FREQ:STAR 2e7")
        assert msg.raw.count(b"\n") == 1
        assert parse_command(msg.raw).body == ":SENS:FREQ:STAR 2e7"


class TestParseBlock:
    def test_basic(self):
        payload, rest = parse_block(b"#3006ABCDEF")
        assert payload.bytes == b"ABCDEF"
        assert payload.declared_length == 6
        assert rest == b""

    def test_empty_payload(self):
        payload, rest = parse_block(b"#10")
        assert payload.bytes == b""
        assert rest == b""

    def test_truncated(self):
        with pytest.raises(ScpiParseError, match="expected 6, got 3"):
            parse_block(b"#3006ABC")

    def test_remainder_reported(self):
        payload, rest = parse_block(b"#14ABCDtail")
        assert payload.bytes == b"ABCD"
        assert rest == b"tail"

    def test_indefinite_rejected(self):
        with pytest.raises(ScpiParseError, match="#0"):
            parse_block(b"#0ABC")

    @pytest.mark.parametrize("bad", [b"", b"x", b"#", b"#x12", b"#2a1AB"])
    def test_malformed(self, bad):
        with pytest.raises(ScpiParseError):
            parse_block(bad)


@given(st.binary(max_size=4096))
@settings(max_examples=300)
def test_block_roundtrip(payload):
    parsed, rest = parse_block(encode_block(payload))
    assert parsed.bytes == payload
    assert rest == b""


@given(st.binary(max_size=2048))
@settings(max_examples=500)
def test_parse_block_never_crashes(data):
    try:
        parse_block(data)
    except ScpiParseError:
        pass


@given(st.text(max_size=256))
@settings(max_examples=500)
def test_parse_resource_never_crashes(text):
    try:
        parse_resource(text)
    except ScpiParseError:
        pass
