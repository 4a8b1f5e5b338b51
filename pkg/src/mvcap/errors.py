"""Exception types shared across the capture, geometry and reconstruction layers."""


class MvcapError(Exception):
    """Base class for all package errors."""


# --- geometry ---------------------------------------------------------------

class DegenerateProjection(MvcapError):
    """Point at or behind the camera's principal plane."""


class InsufficientCameras(MvcapError):
    """Fewer than two cameras supplied where a pair is required."""


class NoDetections(MvcapError):
    """No subject candidate in a frame (a miss-detection)."""


class TriangulationDegenerate(MvcapError):
    """DLT design matrix rank-deficient (near-parallel or coincident rays)."""


class NoObservations(MvcapError):
    """No joint is observed by at least two cameras."""


class NonFiniteResidual(MvcapError):
    """Optimization inputs produced NaN/Inf residuals."""


class EmptyEvaluation(MvcapError):
    """No (joint, camera) pair qualifies for error evaluation."""


# --- synchronization --------------------------------------------------------

class EmptyMatrix(MvcapError):
    """RTT matrix has zero samples per client."""


class NoClients(MvcapError):
    """Operation requires at least one client."""


class InvalidFrequency(MvcapError):
    """Trigger frequency must be positive."""


class MissingPlan(MvcapError):
    """Delay-compensation plan required but absent."""


class MissingOffset(MvcapError):
    """Clock-offset estimate required but absent."""


# --- relay ------------------------------------------------------------------

class UnknownSession(MvcapError):
    pass


class SessionNotOpen(MvcapError):
    pass


class NotHost(MvcapError):
    """Trigger datagram did not come from the session host."""


class UnknownClient(MvcapError):
    pass


# --- data plane -------------------------------------------------------------

class PayloadTooLarge(MvcapError):
    """Record payload exceeds the serialization size guard."""


class ChecksumMismatch(MvcapError):
    pass


class TruncatedInput(MvcapError):
    pass


class BadMagic(MvcapError):
    pass


class DuplicateTrigger(MvcapError):
    """A merged capture with this trigger id was already persisted."""


class IoFailure(MvcapError):
    pass


class ConnectionLost(MvcapError):
    """Stream connection dropped; caller should reconnect and resume."""


# --- visual hull ------------------------------------------------------------

class BadDims(MvcapError):
    """Invalid voxel grid dimensions or extents."""


class NoSilhouettes(MvcapError):
    pass


class EmptyGrid(MvcapError):
    """Carved grid has no occupied voxels."""


# --- experiments ------------------------------------------------------------

class ConfigMismatch(MvcapError):
    """Artifact's embedded config hash does not match the expected one."""
