"""Client streaming: buffer semantics, TCP manager integration, reconnect."""

import socket
import threading
import time

import numpy as np
import pytest

from mvcap.dataplane import (
    CaptureManagerServer,
    CaptureRecord,
    CaptureStore,
    PayloadKind,
    StreamBuffer,
    TcpClientStreamer,
    encode_joints2d,
)
from mvcap.geometry import Intrinsics, Pose, Skeleton2D

INTR = Intrinsics(500.0, 500.0, 320.0, 240.0, 640, 480)


def rec(device, trigger):
    payload = encode_joints2d(Skeleton2D(np.zeros((25, 2)), np.ones(25)))
    return CaptureRecord(device, trigger, 1_000_000 * (trigger + 1),
                         Pose.identity(), INTR, PayloadKind.JOINTS2D, payload)


def test_buffer_drop_oldest_never_blocks():
    buf = StreamBuffer(depth=4)
    for t in range(10):
        buf.offer(rec(0, t))
    assert buf.queued == 4
    assert buf.dropped_oldest == 6
    ids = [buf.take_nowait()[0] for _ in range(4)]
    assert ids == [6, 7, 8, 9]  # oldest were dropped, order preserved


def test_buffer_ack_and_requeue():
    buf = StreamBuffer(depth=16)
    for t in range(5):
        buf.offer(rec(0, t))
    for _ in range(5):
        buf.take_nowait()
    buf.acknowledge(1)
    assert buf.in_flight == 3
    assert buf.requeue_unacked() == 3
    ids = [buf.take_nowait()[0] for _ in range(3)]
    assert ids == [2, 3, 4]


def test_stream_to_manager_and_persist(tmp_path):
    store = CaptureStore(tmp_path)
    devices = [0, 1, 2]
    with CaptureManagerServer(store, devices, port=0,
                              watermark_timeout_s=5.0) as manager:
        addr = manager.address

        def connect():
            s = socket.create_connection(addr, timeout=5.0)
            return s

        streamers = [TcpClientStreamer(connect).start() for _ in devices]
        for t in range(8):
            for d in devices:
                streamers[d].offer(rec(d, t))
        for s in streamers:
            s.close()
        deadline = time.monotonic() + 5.0
        while time.monotonic() < deadline:
            if manager.verifier.accepted >= 24:
                break
            time.sleep(0.05)
    assert store.trigger_ids() == list(range(8))
    entries = list(store.iter_manifest())
    assert all(e["completeness"] == 1.0 for e in entries)
    assert manager.merger.duplicates == {}


class FlakyConnector:
    """Returns sockets that the paired server kills after a few frames."""

    def __init__(self, addr):
        self.addr = addr
        self.connections = 0

    def __call__(self):
        self.connections += 1
        return socket.create_connection(self.addr, timeout=5.0)


def test_reconnect_resumes_without_duplicate_acked_frames(tmp_path):
    store = CaptureStore(tmp_path)
    with CaptureManagerServer(store, [0], port=0,
                              watermark_timeout_s=0.2) as manager:
        connector = FlakyConnector(manager.address)
        streamer = TcpClientStreamer(connector).start()
        for t in range(5):
            streamer.offer(rec(0, t))
        # wait for some deliveries, then kill the server-side connection by
        # forcing the client socket closed under the streamer
        deadline = time.monotonic() + 5.0
        while manager.verifier.accepted < 2 and time.monotonic() < deadline:
            time.sleep(0.02)
        sock = streamer._sock
        if sock is not None:
            sock.shutdown(socket.SHUT_RDWR)
            sock.close()
        for t in range(5, 10):
            streamer.offer(rec(0, t))
        streamer.close()
    assert connector.connections >= 2
    # every trigger id persisted exactly once; duplicates of unacked resends
    # are absorbed by the merger, acked frames were never resent
    assert store.trigger_ids() == list(range(10))
    assert manager.verifier.accepted >= 10


def test_streamer_finishes_queue_on_close(tmp_path):
    store = CaptureStore(tmp_path)
    with CaptureManagerServer(store, [0], port=0,
                              watermark_timeout_s=0.2) as manager:
        streamer = TcpClientStreamer(
            lambda: socket.create_connection(manager.address, timeout=5.0)
        ).start()
        for t in range(20):
            streamer.offer(rec(0, t))
        streamer.close()
        assert streamer.buffer.dropped_oldest == 0
    assert store.trigger_ids() == list(range(20))
