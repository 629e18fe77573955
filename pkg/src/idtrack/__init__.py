"""Identity-specific person tracking: fusing anonymous tracks with face recognition."""

from .fusion import (
    UNKNOWN,
    FaceObservation,
    FusionConfig,
    IdentifiedPerson,
    IdentityMemory,
    SnntsFusion,
    Source,
    TrackDetection,
    associate,
    snnts_step,
)
from .geometry import CameraIntrinsics, Pose2D, RobotFramePoint

__version__ = "0.1.0"
