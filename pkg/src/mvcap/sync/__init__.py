from .compensation import (
    HOST,
    CompensationPlan,
    RttMatrix,
    capture_instant,
    compensation_plan,
    max_rtt,
    mean_rtt,
    plan_from_samples,
)
from .ntp import (
    NTP_AVERAGED_REQUESTS,
    SyncScheme,
    SyncVariant,
    estimate_ntp_offset,
    ntp_offset_from_timestamps,
)
from .triggers import TriggerMsg, UniformTriggerPolicy, schedule_triggers
