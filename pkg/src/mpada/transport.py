"""Raw TCP socket transport for SCPI instruments.

One connection has exactly one owner at a time; callers serialize commands
themselves (the acquisition engine does this per connection).
"""

from __future__ import annotations

import socket
import time

from .errors import InstrumentTimeout, MpadaError
from .scpi import ResourceAddress, frame_command

DEFAULT_TIMEOUT_S = 2.0


class ScpiConnection:
    """Newline-delimited SCPI over a raw TCP socket, with block read support."""

    def __init__(self, address: ResourceAddress, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.address = address
        self.timeout_s = timeout_s
        self._buf = b""
        try:
            self._sock = socket.create_connection((address.host, address.port), timeout=timeout_s)
            self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        except OSError as exc:
            raise MpadaError(f"cannot connect to {address.host}:{address.port}: {exc}") from exc

    def close(self):
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def write(self, body: str):
        self._sock.sendall(frame_command(body).raw)

    def _recv_more(self, deadline: float):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise InstrumentTimeout(f"no response within {self.timeout_s} s")
        self._sock.settimeout(remaining)
        try:
            chunk = self._sock.recv(65536)
        except socket.timeout as exc:
            raise InstrumentTimeout(f"no response within {self.timeout_s} s") from exc
        if not chunk:
            raise InstrumentTimeout("connection closed by instrument")
        self._buf += chunk

    def read_line(self) -> str:
        """Read one newline-terminated ASCII response (terminator stripped)."""
        deadline = time.monotonic() + self.timeout_s
        while b"\n" not in self._buf:
            self._recv_more(deadline)
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("ascii", errors="replace")

    def read_block(self) -> bytes:
        """Read one definite-length block response followed by a newline."""
        deadline = time.monotonic() + self.timeout_s
        while len(self._buf) < 2:
            self._recv_more(deadline)
        if not self._buf.startswith(b"#"):
            # ASCII response, fall through to line semantics
            raise MpadaError(f"expected block response, got {self._buf[:16]!r}")
        n_digits = int(self._buf[1:2]) if self._buf[1:2].isdigit() else None
        if n_digits is None or n_digits == 0:
            raise MpadaError(f"bad block header {self._buf[:2]!r}")
        while len(self._buf) < 2 + n_digits:
            self._recv_more(deadline)
        declared = int(self._buf[2 : 2 + n_digits])
        total = 2 + n_digits + declared + 1  # + trailing newline
        while len(self._buf) < total:
            self._recv_more(deadline)
        payload = self._buf[2 + n_digits : 2 + n_digits + declared]
        self._buf = self._buf[total:]
        return payload

    def ask(self, body: str) -> str:
        self.write(body)
        return self.read_line()

    def ask_block(self, body: str) -> bytes:
        self.write(body)
        return self.read_block()
