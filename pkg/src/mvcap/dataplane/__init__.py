from .framing import FrameDecoder, encode_frame
from .merge import MergedCapture, TriggerMerger
from .payloads import (
    PayloadKind,
    decode_joints2d,
    decode_silhouette,
    encode_joints2d,
    encode_silhouette,
)
from .record import (
    CaptureRecord,
    deserialize_record,
    payload_crc,
    record_size,
    serialize_record,
)
from .store import CaptureStore, trigger_dirname
from .stream import StreamBuffer, TcpClientStreamer
from .tcp import DEFAULT_MANAGER_PORT, CaptureManagerServer
from .verify import RecordVerifier, RejectReason, Verdict, check_record
