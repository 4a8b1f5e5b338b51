"""Fixed 26-byte relay datagram header, little-endian.

Layout: magic (4) | version (1) | kind (1) | session_id (8) | counter (4) |
timestamp_ns (8). The counter field carries the trigger id for TRIGGER
datagrams, the assigned client index for JOIN_ACK, and the target/source
client index for RTT probes and echoes; it is zero otherwise. Datagrams with
an unknown kind or bad magic are dropped silently by the relay.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from ..errors import BadMagic, TruncatedInput

MAGIC = b"RLY0"
VERSION = 1
_HEADER = struct.Struct("<4sBBQIq")
HEADER_SIZE = _HEADER.size  # 26


class Kind(enum.IntEnum):
    JOIN = 1
    JOIN_ACK = 2
    TRIGGER = 3
    RTT_PROBE = 4
    RTT_ECHO = 5
    CLOSE = 6


@dataclass(frozen=True)
class RelayDatagram:
    kind: Kind
    session_id: int
    counter: int = 0          # trigger id / client index, see module docstring
    timestamp_ns: int = 0
    version: int = VERSION

    def encode(self) -> bytes:
        return _HEADER.pack(MAGIC, self.version, int(self.kind),
                            self.session_id, self.counter, self.timestamp_ns)

    @classmethod
    def decode(cls, data: bytes) -> "RelayDatagram":
        if len(data) < HEADER_SIZE:
            raise TruncatedInput(f"datagram is {len(data)} bytes, need {HEADER_SIZE}")
        magic, version, kind, session_id, counter, ts = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise BadMagic(f"bad relay magic {magic!r}")
        return cls(Kind(kind), session_id, counter, ts, version)


def trigger_datagram(session_id: int, trigger_id: int, send_time_ns: int) -> RelayDatagram:
    return RelayDatagram(Kind.TRIGGER, session_id, trigger_id, send_time_ns)
