"""Deterministic policies: observation in, action in ``[-1, 1]`` out."""

import math

import numpy as np

from gym_mobile_manipulation.envs import TaskKind
from gym_mobile_manipulation.net import forward_policy
from gym_mobile_manipulation.simulated_robot import RobotParams

# observation slices, see MobileManipulationEnv
_BASE_X = 0
_GRIPPER = slice(8, 11)
_OBJECT = slice(11, 14)
_OBJECT_VEL = slice(14, 17)


class MlpPolicy:
    """Mean action of a trained Gaussian policy."""

    def __init__(self, params):
        self.params = params

    @property
    def action_dim(self):
        return self.params.policy.output_dim

    def __call__(self, observation):
        mean, _ = forward_policy(self.params, observation)
        return mean


class ZeroPolicy:
    def __init__(self, action_dim):
        self.action_dim = action_dim

    def __call__(self, observation):
        return np.zeros(self.action_dim)


class ScriptedChasePolicy:
    """Move the gripper by one bounded step onto the object's next position.

    The base keeps the arm at ``preferred_reach`` from the object along x, and in the grasping
    task the gripper closes once the object is within half the grasp radius.
    """

    def __init__(self, task=TaskKind.TRACKING, robot=None, preferred_reach=0.55):
        self.task = TaskKind(task)
        self.robot = robot or RobotParams()
        self.preferred_reach = preferred_reach

    @property
    def action_dim(self):
        return self.task.action_dim

    def _step_toward(self, current, target, step_max):
        return np.clip((target - current) / step_max, -1.0, 1.0)

    def __call__(self, observation):
        observation = np.asarray(observation, dtype=np.float64)
        dt = self.robot.control_dt
        if self.task is TaskKind.POINT_TRACKING:
            target = observation[3:6] + observation[6:9] * dt
            return self._step_toward(observation[0:3], target, self.robot.ee_step_max)

        gripper = observation[_GRIPPER]
        target = observation[_OBJECT] + observation[_OBJECT_VEL] * dt
        arm = self._step_toward(gripper, target, self.robot.ee_step_max)

        dy = target[1]
        dz = target[2] - self.robot.shoulder_height
        dx = math.sqrt(max(0.0, self.preferred_reach**2 - dy**2 - dz**2))
        base = self._step_toward(observation[_BASE_X], target[0] - dx, self.robot.base_step_max)
        action = np.append(arm, base)
        if self.task is TaskKind.GRASPING:
            distance = np.linalg.norm(observation[_OBJECT] - gripper)
            close = distance <= 0.5 * self.robot.gripper_grasp_radius
            action = np.append(action, 1.0 if close else -1.0)
        return action
