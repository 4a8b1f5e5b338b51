"""Loopback/LAN deployment of the relay over real UDP sockets."""

from __future__ import annotations

import socket
import threading

from .core import DEFAULT_RELAY_PORT, RelayCore


class UdpRelayServer:
    """One socket, one receive thread, RelayCore for all decisions.

    Datagram handling never blocks on a slow client: sends are fire-and-
    forget UDP writes. Registration happens through the object API (the
    matchmaking role); everything else arrives as datagrams.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_RELAY_PORT,
                 core: RelayCore | None = None):
        self.core = core or RelayCore()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((host, port))
        self._sock.settimeout(0.2)
        self.address = self._sock.getsockname()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._serve, daemon=True)

    def start(self) -> "UdpRelayServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)
        self._sock.close()

    def register_session(self, host_endpoint) -> int:
        return self.core.register_session(host_endpoint)

    def begin_capture(self, session_id: int) -> None:
        self.core.begin_capture(session_id)

    def _serve(self) -> None:
        while not self._stop.is_set():
            try:
                data, source = self._sock.recvfrom(2048)
            except socket.timeout:
                continue
            except OSError:
                break
            for endpoint, payload in self.core.handle(data, source):
                try:
                    self._sock.sendto(payload, endpoint)
                except OSError:
                    self.core.drops["send_failure"] += 1

    def __enter__(self) -> "UdpRelayServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
