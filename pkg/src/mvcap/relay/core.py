"""Transport-agnostic relay: session registry plus trigger fan-out.

A host registers a session (matchmaking stands outside the relay, so
registration is an API call, not a datagram), clients join with JOIN
datagrams, and once capturing starts every TRIGGER from the host is copied
byte-for-byte to all clients. The relay keeps no trigger state: no dedup, no
retransmit — reliability belongs to the data plane.

The same core runs over real UDP sockets (see ``udp.py``) and over the
in-process simulated network; ``handle`` turns one inbound datagram into a
list of outbound (endpoint, bytes) sends.
"""

from __future__ import annotations

import enum
import threading
from collections import Counter
from dataclasses import dataclass, field

from ..errors import NotHost, SessionNotOpen, UnknownClient, UnknownSession
from .wire import Kind, RelayDatagram

# Simulated per-forward processing budget (seconds); must stay under 1 ms.
DEFAULT_PROC_DELAY_S = 0.0
DEFAULT_RELAY_PORT = 40000


class SessionState(enum.Enum):
    OPEN = "open"
    CAPTURING = "capturing"
    CLOSED = "closed"


@dataclass
class Session:
    session_id: int
    host: object
    clients: list = field(default_factory=list)   # index a -> endpoint
    state: SessionState = SessionState.OPEN

    def client_index(self, endpoint) -> int | None:
        try:
            return self.clients.index(endpoint)
        except ValueError:
            return None


class RelayCore:
    """Session registry + forwarding logic, safe for concurrent handlers."""

    def __init__(self, proc_delay_s: float = DEFAULT_PROC_DELAY_S):
        if proc_delay_s > 1e-3:
            raise ValueError("relay processing budget is 1 ms")
        self.proc_delay_s = proc_delay_s
        self._sessions: dict[int, Session] = {}
        self._next_id = 1
        self._lock = threading.Lock()
        self.drops = Counter()

    # -- registry ------------------------------------------------------------

    def register_session(self, host_endpoint) -> int:
        with self._lock:
            sid = self._next_id
            self._next_id += 1
            self._sessions[sid] = Session(sid, host_endpoint)
            return sid

    def join_session(self, session_id: int, client_endpoint) -> int:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"session {session_id}")
            if session.state is not SessionState.OPEN:
                raise SessionNotOpen(f"session {session_id} is {session.state.value}")
            session.clients.append(client_endpoint)
            return len(session.clients) - 1

    def begin_capture(self, session_id: int) -> None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"session {session_id}")
            if session.state is SessionState.CLOSED:
                raise SessionNotOpen("session already closed")
            session.state = SessionState.CAPTURING

    def close_session(self, session_id: int) -> None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"session {session_id}")
            session.state = SessionState.CLOSED

    def session(self, session_id: int) -> Session:
        with self._lock:
            if session_id not in self._sessions:
                raise UnknownSession(f"session {session_id}")
            return self._sessions[session_id]

    # -- datagram path -------------------------------------------------------

    def handle(self, data: bytes, source) -> list[tuple[object, bytes]]:
        """Process one inbound datagram; returns (endpoint, payload) sends.

        Malformed datagrams and guard violations drop the datagram and bump a
        counter instead of raising: the relay must never die on wire input.
        """
        try:
            dgram = RelayDatagram.decode(data)
        except Exception:
            self.drops["malformed"] += 1
            return []
        if dgram.kind not in Kind.__members__.values():
            self.drops["unknown_kind"] += 1
            return []

        with self._lock:
            session = self._sessions.get(dgram.session_id)
            if session is None:
                self.drops["unknown_session"] += 1
                return []

            if dgram.kind is Kind.JOIN:
                if session.state is not SessionState.OPEN:
                    self.drops["join_not_open"] += 1
                    return []
                session.clients.append(source)
                ack = RelayDatagram(Kind.JOIN_ACK, session.session_id,
                                    counter=len(session.clients) - 1,
                                    timestamp_ns=dgram.timestamp_ns)
                return [(source, ack.encode())]

            if dgram.kind is Kind.TRIGGER:
                if source != session.host:
                    self.drops["not_host"] += 1
                    return []
                if session.state is SessionState.OPEN:
                    # first host trigger marks the capture start
                    session.state = SessionState.CAPTURING
                if session.state is not SessionState.CAPTURING:
                    self.drops["not_capturing"] += 1
                    return []
                # fan-out: forwarded bytes are the received bytes, untouched
                return [(client, data) for client in session.clients]

            if dgram.kind is Kind.RTT_PROBE:
                if source != session.host:
                    self.drops["not_host"] += 1
                    return []
                idx = dgram.counter
                if idx >= len(session.clients):
                    self.drops["unknown_client"] += 1
                    return []
                return [(session.clients[idx], data)]

            if dgram.kind is Kind.RTT_ECHO:
                if session.client_index(source) is None:
                    self.drops["unknown_client"] += 1
                    return []
                return [(session.host, data)]

            if dgram.kind is Kind.CLOSE:
                if source != session.host:
                    self.drops["not_host"] += 1
                    return []
                session.state = SessionState.CLOSED
                return []

        return []

    def forward_trigger(self, data: bytes, source) -> list[tuple[object, bytes]]:
        """Strict-API variant of the TRIGGER path: raises on guard violations."""
        dgram = RelayDatagram.decode(data)
        session = self.session(dgram.session_id)
        if source != session.host:
            self.drops["not_host"] += 1
            raise NotHost(f"{source!r} is not the host of session {session.session_id}")
        if session.state is not SessionState.CAPTURING:
            raise SessionNotOpen("triggers only flow while capturing")
        return [(client, data) for client in session.clients]

    def echo_rtt(self, data: bytes, source) -> list[tuple[object, bytes]]:
        """Strict-API variant of the RTT_PROBE path: raises UnknownClient."""
        dgram = RelayDatagram.decode(data)
        session = self.session(dgram.session_id)
        if dgram.kind is Kind.RTT_PROBE:
            if dgram.counter >= len(session.clients):
                raise UnknownClient(f"client {dgram.counter}")
            return [(session.clients[dgram.counter], data)]
        if dgram.kind is Kind.RTT_ECHO:
            return [(session.host, data)]
        raise ValueError("echo_rtt only handles RTT datagrams")
