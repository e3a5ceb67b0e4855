from .dynamic_grasping_env import DynamicGraspingEnv
from .dynamic_tracking_env import DynamicTrackingEnv
from .mobile_manipulation_env import EnvConfig, MobileManipulationEnv, StepResult, TaskKind
from .point_tracking_env import PointTrackingEnv

__all__ = [
    "DynamicGraspingEnv",
    "DynamicTrackingEnv",
    "EnvConfig",
    "MobileManipulationEnv",
    "PointTrackingEnv",
    "StepResult",
    "TaskKind",
]
