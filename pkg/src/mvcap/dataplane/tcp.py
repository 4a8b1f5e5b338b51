"""Manager side of the data plane over real TCP sockets.

One listening socket; each device connection gets its own decode+verify
pipeline thread feeding the shared merge stage, which is the sole writer to
the store. Every decoded frame is acknowledged with its trigger id so
clients can resume after a reconnect without duplicating delivered frames.
"""

from __future__ import annotations

import socket
import threading

from .framing import FrameDecoder
from .merge import TriggerMerger
from .record import MAGIC as RECORD_MAGIC
from .record import deserialize_record
from .store import CaptureStore
from .stream import ACK
from .verify import RecordVerifier

DEFAULT_MANAGER_PORT = 40001


class CaptureManagerServer:
    def __init__(self, store: CaptureStore, expected_devices: list[int],
                 host: str = "127.0.0.1", port: int = DEFAULT_MANAGER_PORT,
                 expected_joints: int = 25,
                 watermark_timeout_s: float = 0.5,
                 clock=None):
        self.store = store
        self.merger = TriggerMerger(expected_devices, watermark_timeout_s)
        self.verifier = RecordVerifier(expected_joints)
        self._clock = clock or __import__("time").monotonic
        self._merge_lock = threading.Lock()
        self.decode_failures = 0
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(16)
        self._listener.settimeout(0.2)
        self.address = self._listener.getsockname()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._accepter = threading.Thread(target=self._accept_loop, daemon=True)

    def start(self) -> "CaptureManagerServer":
        self._accepter.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._accepter.join(timeout=2.0)
        self._listener.close()
        for t in self._threads:
            t.join(timeout=2.0)
        with self._merge_lock:
            for merged in self.merger.finish():
                self.store.persist(merged)

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            t = threading.Thread(target=self._serve_connection, args=(conn,),
                                 daemon=True)
            t.start()
            self._threads.append(t)

    def _serve_connection(self, conn: socket.socket) -> None:
        decoder = FrameDecoder(body_prefix=RECORD_MAGIC)
        conn.settimeout(0.5)
        with conn:
            while not self._stop.is_set():
                try:
                    chunk = conn.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not chunk:
                    break
                for body in decoder.feed(chunk):
                    try:
                        record = deserialize_record(body)
                    except Exception:
                        self.decode_failures += 1
                        continue
                    if self.verifier.verify(record):
                        with self._merge_lock:
                            done = self.merger.push(record, self._clock())
                            for merged in done:
                                self.store.persist(merged)
                    try:
                        conn.sendall(ACK.pack(record.trigger_id))
                    except OSError:
                        break

    def __enter__(self) -> "CaptureManagerServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
