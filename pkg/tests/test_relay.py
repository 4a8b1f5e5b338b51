import numpy as np
import pytest

from mvcap.errors import (
    BadMagic,
    NotHost,
    SessionNotOpen,
    TruncatedInput,
    UnknownClient,
    UnknownSession,
)
from mvcap.relay import HEADER_SIZE, Kind, RelayCore, RelayDatagram, SessionState
from mvcap.relay.wire import trigger_datagram


HOST = ("10.0.0.1", 5000)
CLIENTS = [("10.0.0.2", 5000), ("10.0.0.3", 5000), ("10.0.0.4", 5000)]


def capture_session(core, clients=3):
    sid = core.register_session(HOST)
    for c in CLIENTS[:clients]:
        core.join_session(sid, c)
    core.begin_capture(sid)
    return sid


def test_wire_round_trip_and_size():
    d = RelayDatagram(Kind.TRIGGER, session_id=7, counter=42, timestamp_ns=123456789)
    raw = d.encode()
    assert len(raw) == HEADER_SIZE == 26
    assert RelayDatagram.decode(raw) == d


def test_wire_rejects_bad_input():
    with pytest.raises(TruncatedInput):
        RelayDatagram.decode(b"\x00" * 10)
    raw = bytearray(RelayDatagram(Kind.JOIN, 1).encode())
    raw[:4] = b"XXXX"
    with pytest.raises(BadMagic):
        RelayDatagram.decode(bytes(raw))


def test_register_session_monotonic_ids():
    core = RelayCore()
    assert core.register_session(HOST) == 1
    assert core.register_session(HOST) == 2  # re-registration is independent
    assert core.register_session(("10.9.9.9", 1)) == 3


def test_join_assigns_dense_indices():
    core = RelayCore()
    sid = core.register_session(HOST)
    assert core.join_session(sid, CLIENTS[0]) == 0
    assert core.join_session(sid, CLIENTS[1]) == 1
    # a six-device session: host plus clients 0..4
    for k in range(3):
        idx = core.join_session(sid, (f"10.0.1.{k}", 5000))
        assert idx == 2 + k


def test_join_guards():
    core = RelayCore()
    with pytest.raises(UnknownSession):
        core.join_session(99, CLIENTS[0])
    sid = core.register_session(HOST)
    core.begin_capture(sid)
    with pytest.raises(SessionNotOpen):
        core.join_session(sid, CLIENTS[0])


def test_join_datagram_gets_ack_with_index():
    core = RelayCore()
    sid = core.register_session(HOST)
    out = core.handle(RelayDatagram(Kind.JOIN, sid).encode(), CLIENTS[0])
    assert len(out) == 1
    endpoint, payload = out[0]
    ack = RelayDatagram.decode(payload)
    assert endpoint == CLIENTS[0]
    assert ack.kind is Kind.JOIN_ACK and ack.counter == 0
    out = core.handle(RelayDatagram(Kind.JOIN, sid).encode(), CLIENTS[1])
    assert RelayDatagram.decode(out[0][1]).counter == 1


def test_trigger_fans_out_identical_bytes():
    core = RelayCore()
    sid = capture_session(core)
    raw = trigger_datagram(sid, 7, 1000).encode()
    out = core.handle(raw, HOST)
    assert [e for e, _ in out] == CLIENTS
    assert all(payload == raw for _, payload in out)


def test_trigger_from_non_host_dropped_and_counted():
    core = RelayCore()
    sid = capture_session(core)
    raw = trigger_datagram(sid, 1, 0).encode()
    assert core.handle(raw, CLIENTS[0]) == []
    assert core.drops["not_host"] == 1
    with pytest.raises(NotHost):
        core.forward_trigger(raw, CLIENTS[0])


def test_trigger_requires_capturing_via_strict_api():
    core = RelayCore()
    sid = core.register_session(HOST)
    core.join_session(sid, CLIENTS[0])
    raw = trigger_datagram(sid, 0, 0).encode()
    with pytest.raises(SessionNotOpen):
        core.forward_trigger(raw, HOST)
    # the datagram path instead treats the first host trigger as the start
    out = core.handle(raw, HOST)
    assert len(out) == 1
    assert core.session(sid).state is SessionState.CAPTURING


def test_full_minute_at_20hz_forwards_every_id():
    core = RelayCore()
    sid = capture_session(core, clients=3)
    seen = {c: [] for c in CLIENTS}
    for trigger_id in range(1201):
        raw = trigger_datagram(sid, trigger_id, trigger_id * 50_000_000).encode()
        for endpoint, payload in core.handle(raw, HOST):
            seen[endpoint].append(RelayDatagram.decode(payload).counter)
    for ids in seen.values():
        assert ids == list(range(1201))


def test_rtt_probe_routes_to_client_and_back():
    core = RelayCore()
    sid = capture_session(core)
    probe = RelayDatagram(Kind.RTT_PROBE, sid, counter=1, timestamp_ns=555).encode()
    out = core.handle(probe, HOST)
    assert out == [(CLIENTS[1], probe)]
    echo = RelayDatagram(Kind.RTT_ECHO, sid, counter=1, timestamp_ns=555).encode()
    back = core.handle(echo, CLIENTS[1])
    assert back == [(HOST, echo)]
    # the original timestamp survives the round trip
    assert RelayDatagram.decode(back[0][1]).timestamp_ns == 555


def test_rtt_probe_to_unknown_client():
    core = RelayCore()
    sid = capture_session(core, clients=2)
    probe = RelayDatagram(Kind.RTT_PROBE, sid, counter=9).encode()
    with pytest.raises(UnknownClient):
        core.echo_rtt(probe, HOST)
    assert core.handle(probe, HOST) == []
    assert core.drops["unknown_client"] == 1


def test_unknown_kind_and_garbage_dropped_silently():
    core = RelayCore()
    sid = capture_session(core)
    raw = bytearray(RelayDatagram(Kind.TRIGGER, sid).encode())
    raw[5] = 250  # unknown kind byte
    assert core.handle(bytes(raw), HOST) == []
    assert core.handle(b"not-a-datagram-at-all-padding", HOST) == []
    assert core.drops["malformed"] + core.drops["unknown_kind"] == 2


def test_session_isolation_under_interleaving():
    core = RelayCore()
    host_x, host_y = ("10.1.0.1", 1), ("10.2.0.1", 1)
    cx = [("10.1.0.2", 1), ("10.1.0.3", 1)]
    cy = [("10.2.0.2", 1), ("10.2.0.3", 1)]
    sx = core.register_session(host_x)
    sy = core.register_session(host_y)
    for c in cx:
        core.join_session(sx, c)
    for c in cy:
        core.join_session(sy, c)
    core.begin_capture(sx)
    core.begin_capture(sy)
    rng = np.random.default_rng(4)
    deliveries = {e: set() for e in cx + cy}
    for k in range(500):
        if rng.random() < 0.5:
            out = core.handle(trigger_datagram(sx, k, 0).encode(), host_x)
            expect = set(cx)
        else:
            out = core.handle(trigger_datagram(sy, k, 0).encode(), host_y)
            expect = set(cy)
        assert {e for e, _ in out} == expect
        for e, payload in out:
            deliveries[e].add(RelayDatagram.decode(payload).session_id)
    for e in cx:
        assert deliveries[e] <= {sx}
    for e in cy:
        assert deliveries[e] <= {sy}


def test_loss_tolerance_monte_carlo():
    # i.i.d. datagram loss p applied on the relay->client link: delivered
    # fraction converges to 1 - p (10k triggers, within 2 points)
    core = RelayCore()
    sid = capture_session(core, clients=1)
    p = 0.3
    rng = np.random.default_rng(99)
    delivered = 0
    n = 10_000
    for k in range(n):
        out = core.handle(trigger_datagram(sid, k, 0).encode(), HOST)
        assert len(out) == 1
        if rng.random() >= p:
            delivered += 1
    assert abs(delivered / n - (1.0 - p)) < 0.02


def test_close_session_stops_forwarding():
    core = RelayCore()
    sid = capture_session(core)
    core.handle(RelayDatagram(Kind.CLOSE, sid).encode(), HOST)
    assert core.session(sid).state is SessionState.CLOSED
    assert core.handle(trigger_datagram(sid, 5, 0).encode(), HOST) == []
