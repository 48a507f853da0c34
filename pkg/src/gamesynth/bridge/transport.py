"""Line-oriented byte channels to external engines (subprocess pipes or TCP)."""
from __future__ import annotations

import os
import select
import shlex
import socket
import subprocess
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional


class BridgeError(RuntimeError):
    """Base class; ``raw`` keeps whatever bytes were received for logging."""

    def __init__(self, message: str, raw: bytes = b""):
        super().__init__(message)
        self.raw = raw


class ConnectFailed(BridgeError):
    pass


class ResponseTimeout(BridgeError):
    pass


class MalformedResponse(BridgeError):
    pass


class Transport(Enum):
    SUBPROCESS = "subprocess"
    TCP = "tcp"


@dataclass(frozen=True)
class EngineEndpoint:
    transport: Transport
    target: tuple[str, ...]  # argv for SUBPROCESS, (host, port) for TCP
    connect_timeout_ms: int = 10_000
    response_timeout_ms: int = 30_000
    env: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.connect_timeout_ms <= 0 or self.response_timeout_ms <= 0:
            raise ValueError("timeouts must be positive")
        if not self.target:
            raise ValueError("endpoint needs a command line or an address")
        if self.transport == Transport.TCP and len(self.target) != 2:
            raise ValueError("TCP endpoints are (host, port)")

    @classmethod
    def subprocess(cls, command: str | list[str], **kw) -> "EngineEndpoint":
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        return cls(Transport.SUBPROCESS, tuple(argv), **kw)

    @classmethod
    def tcp(cls, host: str, port: int, **kw) -> "EngineEndpoint":
        return cls(Transport.TCP, (host, str(port)), **kw)

    def to_dict(self) -> dict:
        return {"transport": self.transport.value, "target": list(self.target),
                "connect_timeout_ms": self.connect_timeout_ms,
                "response_timeout_ms": self.response_timeout_ms, "env": dict(self.env)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EngineEndpoint":
        target = d["target"]
        if isinstance(target, str):
            target = shlex.split(target) if d["transport"] == "subprocess" else target.rsplit(":", 1)
        return cls(Transport(d["transport"]), tuple(str(t) for t in target),
                   int(d.get("connect_timeout_ms", 10_000)), int(d.get("response_timeout_ms", 30_000)),
                   dict(d.get("env", {})))


class LineChannel:
    """Send LF-terminated lines, read lines with a deadline.

    On a timeout the caller is expected to ``close()`` the channel: the peer
    may still be mid-response, so the stream can no longer be trusted.
    """

    def __init__(self, endpoint: EngineEndpoint):
        self.endpoint = endpoint
        self._proc: Optional[subprocess.Popen] = None
        self._sock: Optional[socket.socket] = None
        self._buf = b""
        self._eof = False
        self._open()

    def _open(self):
        ep = self.endpoint
        try:
            if ep.transport == Transport.SUBPROCESS:
                env = dict(os.environ, **ep.env) if ep.env else None
                self._proc = subprocess.Popen(list(ep.target), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                              stderr=subprocess.DEVNULL, env=env, bufsize=0)
                self._rfd = self._proc.stdout.fileno()
            else:
                host, port = ep.target
                self._sock = socket.create_connection((host, int(port)), timeout=ep.connect_timeout_ms / 1000)
                self._sock.settimeout(None)
                self._rfd = self._sock.fileno()
        except (OSError, ValueError) as exc:
            raise ConnectFailed(f"cannot reach engine {' '.join(ep.target)}: {exc}") from None

    @property
    def alive(self) -> bool:
        if self._eof:
            return False
        if self._proc is not None:
            return self._proc.poll() is None
        return self._sock is not None

    def send_line(self, line: str) -> None:
        data = (line.rstrip("\n") + "\n").encode("utf-8")
        try:
            if self._proc is not None:
                self._proc.stdin.write(data)
                self._proc.stdin.flush()
            elif self._sock is not None:
                self._sock.sendall(data)
            else:
                raise OSError("channel is closed")
        except OSError as exc:
            raise ConnectFailed(f"engine connection lost while sending: {exc}") from None

    def read_line(self, timeout_s: float) -> bytes:
        """Next line without its terminator; raises ResponseTimeout or ConnectFailed."""
        deadline = time.monotonic() + timeout_s
        while b"\n" not in self._buf:
            if self._eof:
                raise ConnectFailed("engine closed the stream", self._buf)
            left = deadline - time.monotonic()
            if left <= 0:
                raise ResponseTimeout(f"no complete line within {timeout_s:.3f}s", self._buf)
            ready, _, _ = select.select([self._rfd], [], [], left)
            if not ready:
                continue
            chunk = os.read(self._rfd, 65536)
            if not chunk:
                self._eof = True
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.rstrip(b"\r")

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.kill()
            self._proc.wait()
            self._proc.stdout.close()
            self._proc = None
        if self._sock is not None:
            self._sock.close()
            self._sock = None
        self._buf = b""
        self._eof = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
