"""Length-prefixed stream framing with resynchronization.

A frame is magic (4) | body length (u32 LE) | body. The decoder is a push
parser: feed it arbitrary byte chunks, collect whole frame bodies. After
corruption it scans forward to the next magic, so garbage between frames
costs at most the adjacent frame.
"""

from __future__ import annotations

import struct

MAGIC = b"FRM0"
_LEN = struct.Struct("<I")
FRAME_OVERHEAD = 4 + _LEN.size

# Bodies larger than this are treated as corruption during resync.
MAX_BODY = 64 * 1024 * 1024


def encode_frame(body: bytes) -> bytes:
    if len(body) == 0:
        raise ValueError("frame body must be non-empty")
    return MAGIC + _LEN.pack(len(body)) + body


class FrameDecoder:
    """Incremental frame extractor with magic-based resync.

    ``body_prefix`` (when given) is checked as soon as the first body bytes
    arrive, so a fake magic + huge length inside garbage cannot swallow the
    frames that follow it.
    """

    def __init__(self, body_prefix: bytes = b""):
        self._buf = bytearray()
        self._prefix = body_prefix
        self.resyncs = 0
        self.garbage_bytes = 0

    def _false_sync(self) -> None:
        self.garbage_bytes += 1
        del self._buf[:1]
        self.resyncs += 1

    def feed(self, chunk: bytes) -> list[bytes]:
        self._buf.extend(chunk)
        out = []
        while True:
            if len(self._buf) < FRAME_OVERHEAD:
                break
            if self._buf[:4] != MAGIC:
                idx = self._buf.find(MAGIC, 1)
                if idx < 0:
                    # keep a tail that could be a magic prefix
                    drop = max(len(self._buf) - 3, 0)
                    self.garbage_bytes += drop
                    del self._buf[:drop]
                    break
                self.garbage_bytes += idx
                del self._buf[:idx]
                self.resyncs += 1
                continue
            (n,) = _LEN.unpack_from(self._buf, 4)
            if n == 0 or n > MAX_BODY:
                # implausible length: treat the magic as a false positive
                self._false_sync()
                continue
            if self._prefix:
                head = self._buf[FRAME_OVERHEAD:FRAME_OVERHEAD + len(self._prefix)]
                if len(head) == len(self._prefix) and bytes(head) != self._prefix:
                    self._false_sync()
                    continue
            if len(self._buf) < FRAME_OVERHEAD + n:
                break
            body = bytes(self._buf[FRAME_OVERHEAD:FRAME_OVERHEAD + n])
            del self._buf[:FRAME_OVERHEAD + n]
            out.append(body)
        return out

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)
