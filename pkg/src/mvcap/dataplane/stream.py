"""Client-side record streaming with a bounded congestion buffer.

The capture path hands frames to :class:`StreamBuffer` and never blocks:
when the buffer is full the oldest unsent frame is dropped and counted.
Sent frames wait for an acknowledgement (the manager acks the trigger id of
every frame it receives); on a lost connection the unacknowledged tail is
re-queued in order, so acknowledged frames are never delivered twice.
"""

from __future__ import annotations

import socket
import struct
import threading
from collections import deque

from ..errors import ConnectionLost
from .framing import encode_frame
from .record import CaptureRecord, serialize_record

DEFAULT_BUFFER_DEPTH = 256
ACK = struct.Struct("<I")


class StreamBuffer:
    """Ordered send queue + in-flight bookkeeping shared by all transports."""

    def __init__(self, depth: int = DEFAULT_BUFFER_DEPTH):
        if depth < 1:
            raise ValueError("buffer depth must be >= 1")
        self.depth = depth
        self._queue: deque = deque()        # (trigger_id, frame bytes)
        self._unacked: deque = deque()
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self.dropped_oldest = 0
        self.offered = 0
        self.sent = 0
        self._closed = False

    def offer(self, record: CaptureRecord) -> None:
        """Enqueue one record for transmission; drops the oldest when full."""
        frame = encode_frame(serialize_record(record))
        with self._ready:
            self.offered += 1
            if len(self._queue) >= self.depth:
                self._queue.popleft()
                self.dropped_oldest += 1
            self._queue.append((record.trigger_id, frame))
            self._ready.notify()

    def close(self) -> None:
        with self._ready:
            self._closed = True
            self._ready.notify_all()

    @property
    def queued(self) -> int:
        with self._lock:
            return len(self._queue)

    @property
    def in_flight(self) -> int:
        with self._lock:
            return len(self._unacked)

    def next_frame(self, timeout: float | None = None):
        """Pop the next frame to send (blocking); None when closed and empty."""
        with self._ready:
            while not self._queue and not self._closed:
                if not self._ready.wait(timeout=timeout):
                    return None
            if not self._queue:
                return None
            item = self._queue.popleft()
            self._unacked.append(item)
            self.sent += 1
            return item

    def take_nowait(self):
        """Non-blocking variant for event-driven (simulated) transports."""
        with self._lock:
            if not self._queue:
                return None
            item = self._queue.popleft()
            self._unacked.append(item)
            self.sent += 1
            return item

    def acknowledge(self, trigger_id: int) -> None:
        """Drop in-flight frames up to and including ``trigger_id``."""
        with self._lock:
            while self._unacked and self._unacked[0][0] <= trigger_id:
                self._unacked.popleft()

    def requeue_unacked(self) -> int:
        """Put the unacknowledged tail back at the queue head (reconnect path).

        Frames pushed out of the depth bound by the re-queue are dropped from
        the newest end of the re-queued range, preserving order.
        """
        with self._lock:
            n = len(self._unacked)
            while self._unacked:
                self._queue.appendleft(self._unacked.pop())
            while len(self._queue) > self.depth:
                self._queue.popleft()
                self.dropped_oldest += 1
            self.sent -= n
            return n


class TcpClientStreamer:
    """Sender/ack-reader thread pair over a (re)connectable TCP socket.

    ``connect`` is a zero-argument factory returning a connected socket; it
    is invoked again after a connection loss and the unacknowledged frames
    are resent first.
    """

    def __init__(self, connect, buffer: StreamBuffer | None = None,
                 max_reconnects: int = 8):
        self.buffer = buffer or StreamBuffer()
        self._connect = connect
        self.max_reconnects = max_reconnects
        self.reconnects = 0
        self._sock = None
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)
        self.error: Exception | None = None

    def start(self) -> "TcpClientStreamer":
        self._thread.start()
        return self

    def offer(self, record: CaptureRecord) -> None:
        self.buffer.offer(record)

    def close(self, timeout: float = 10.0) -> None:
        self.buffer.close()
        self._thread.join(timeout=timeout)
        self._stop.set()
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass

    def _ensure_connected(self):
        if self._sock is not None:
            return
        self._sock = self._connect()
        self._sock.settimeout(5.0)

    def _run(self) -> None:
        while not self._stop.is_set():
            item = self.buffer.next_frame(timeout=0.2)
            if item is None:
                if self.buffer.queued == 0 and self.buffer._closed:
                    break
                continue
            trigger_id, frame = item
            while True:
                try:
                    self._ensure_connected()
                    self._sock.sendall(frame)
                    ack = self._recv_ack()
                    self.buffer.acknowledge(ack)
                    break
                except (OSError, ConnectionLost) as e:
                    self._sock = None
                    self.buffer.requeue_unacked()
                    self.reconnects += 1
                    if self.reconnects > self.max_reconnects:
                        self.error = ConnectionLost(str(e))
                        self.buffer.close()
                        return
                    item = self.buffer.next_frame(timeout=0.2)
                    if item is None:
                        break
                    trigger_id, frame = item

    def _recv_ack(self) -> int:
        buf = b""
        while len(buf) < ACK.size:
            chunk = self._sock.recv(ACK.size - len(buf))
            if not chunk:
                raise ConnectionLost("manager closed the connection")
            buf += chunk
        return ACK.unpack(buf)[0]
