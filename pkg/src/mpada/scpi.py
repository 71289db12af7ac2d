"""SCPI message framing, IEEE 488.2 definite-length blocks, and resource addresses.

Pure functions; safe to call concurrently. The wire format is newline-terminated
ASCII commands plus '#'-prefixed definite-length blocks for binary payloads.
Indefinite-length blocks ('#0') are rejected on purpose: deterministic parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ScpiParseError

TERMINATOR = b"\n"

_RESOURCE_RE = re.compile(
    r"^(?P<scheme>TCPIP\d*)::(?P<host>[^:]+)::(?P<port>[^:]+)::(?P<suffix>SOCKET)$",
    re.IGNORECASE,
)


class MessageKind(Enum):
    COMMAND = "command"
    QUERY = "query"
    RESPONSE = "response"


@dataclass(frozen=True)
class ResourceAddress:
    """Parsed VISA-style raw-socket resource string."""

    host: str
    port: int
    scheme: str = "tcp-socket"

    def __post_init__(self):
        if not self.host:
            raise ScpiParseError("resource address: empty host")
        if not 1 <= self.port <= 65535:
            raise ScpiParseError(f"resource address: port {self.port} out of range 1-65535")


@dataclass(frozen=True)
class ScpiMessage:
    raw: bytes
    kind: MessageKind

    @property
    def body(self) -> str:
        return self.raw.rstrip(b"\n").decode("ascii")


@dataclass(frozen=True)
class BlockPayload:
    bytes: bytes
    declared_length: int

    def __post_init__(self):
        if len(self.bytes) != self.declared_length:
            raise ScpiParseError(
                f"block payload length {len(self.bytes)} != declared {self.declared_length}"
            )


def parse_resource(address: str) -> ResourceAddress:
    """Parse "TCPIP0::<host>::<port>::SOCKET" (scheme and SOCKET case-insensitive)."""
    if not address:
        raise ScpiParseError("resource address: empty string")
    m = _RESOURCE_RE.match(address.strip())
    if m is None:
        raise ScpiParseError(
            f"resource address {address!r}: expected TCPIP0::<host>::<port>::SOCKET"
        )
    host = m.group("host").strip()
    if not host:
        raise ScpiParseError(f"resource address {address!r}: empty host segment")
    port_str = m.group("port").strip()
    if not port_str.isdigit():
        raise ScpiParseError(f"resource address {address!r}: non-numeric port {port_str!r}")
    port = int(port_str)
    if not 1 <= port <= 65535:
        raise ScpiParseError(f"resource address {address!r}: port {port} out of range")
    return ResourceAddress(host=host, port=port)


def frame_command(body: str) -> ScpiMessage:
    """Frame a command/query body with a single trailing newline.

    kind is QUERY iff the header token (first whitespace-delimited token)
    ends in '?'.
    """
    if not body:
        raise ScpiParseError("empty command body")
    if "\n" in body or "\r" in body:
        raise ScpiParseError("command body contains a newline")
    header = body.split()[0]
    kind = MessageKind.QUERY if header.endswith("?") else MessageKind.COMMAND
    return ScpiMessage(raw=body.encode("ascii") + TERMINATOR, kind=kind)


def parse_command(raw: bytes) -> ScpiMessage:
    """Inverse of frame_command: strip the terminator and reclassify."""
    if not raw.endswith(TERMINATOR):
        raise ScpiParseError("message missing newline terminator")
    body = raw[:-1]
    if b"\n" in body:
        raise ScpiParseError("message contains interior newline")
    return frame_command(body.decode("ascii", errors="replace"))


def encode_block(payload: bytes) -> bytes:
    """Write a definite-length arbitrary block: #<d><len digits><payload>."""
    length = str(len(payload)).encode("ascii")
    return b"#" + str(len(length)).encode("ascii") + length + payload


def parse_block(data: bytes) -> tuple[BlockPayload, bytes]:
    """Parse a definite-length block; returns (payload, remainder beyond it).

    Never raises anything but ScpiParseError, on arbitrary input.
    """
    if not data.startswith(b"#"):
        raise ScpiParseError("block: missing '#' prefix")
    if len(data) < 2:
        raise ScpiParseError("block: truncated after '#'")
    digit_char = data[1:2]
    if not digit_char.isdigit():
        raise ScpiParseError(f"block: length-of-length byte {digit_char!r} is not a digit")
    n_digits = int(digit_char)
    if n_digits == 0:
        raise ScpiParseError("block: indefinite-length ('#0') blocks are not supported")
    length_field = data[2 : 2 + n_digits]
    if len(length_field) < n_digits:
        raise ScpiParseError(f"block: truncated length field, expected {n_digits} digits")
    if not length_field.isdigit():
        raise ScpiParseError(f"block: non-digit length field {length_field!r}")
    declared = int(length_field)
    start = 2 + n_digits
    payload = data[start : start + declared]
    if len(payload) < declared:
        raise ScpiParseError(f"block: truncated payload, expected {declared}, got {len(payload)}")
    return BlockPayload(bytes=payload, declared_length=declared), data[start + declared :]
