from .actor import ActorModel, MotionScript, actor_pose_at, exercise_script, rest_script
from .cameras import (
    CameraTrajectory,
    MotionClass,
    PoseNoiseWalk,
    look_at_pose,
    noisy_pose,
    ring_trajectories,
)
from .clock import DeviceClock, random_clock
from .events import EventLoop
from .network import LOST, DatagramLink, LinkModel, ReliablePipe, network_deliver
from .observe import (
    observe_joints,
    render_actor_silhouette,
    render_silhouette,
    sphere_silhouette,
)
from .scenario import (
    NetworkConfig,
    NoiseConfig,
    ScenarioConfig,
    canonical_json,
    config_hash,
    load_scenario,
    preset,
)
from .session import SessionResult, SessionRunner, run_session
from .spread import measure_capture_spread
