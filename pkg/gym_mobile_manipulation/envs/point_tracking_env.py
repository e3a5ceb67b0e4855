import numpy as np
from gymnasium import Env, spaces

from gym_mobile_manipulation.envs.mobile_manipulation_env import (
    EnvConfig,
    StepResult,
    precision_reward,
    task_id,
)
from gym_mobile_manipulation.errors import EpisodeDoneError
from gym_mobile_manipulation.trajectories import SEED_SPACE, TrajectoryFamily, goal_at, sample_spec


class PointTrackingEnv(Env):
    """
    ## Description

    Toy version of the tracking task: a point gripper that moves freely inside the workspace has
    to stay on a moving goal. There is no arm, no base, no noise and no dynamics randomization, so
    a working learner improves on it within a few hundred thousand steps.

    ## Action space

    | Index | Action     | Min  | Max |
    | ----- | ---------- | ---- | --- |
    | 0-2   | Gripper dx, dy, dz (unit = `robot.ee_step_max` metres) | -1.0 | 1.0 |

    ## Observation space

    | Index | Observation                         | Unit |
    | ----- | ----------------------------------- | ---- |
    | 0-2   | Gripper position                    | m    |
    | 3-5   | Goal position                       | m    |
    | 6-8   | Goal velocity                       | m/s  |
    | 9-11  | Goal position - gripper position    | m    |

    ## Reward

    Same precision reward as the tracking task, ``-d + exp(-100 d^2)``.
    """

    metadata = {"render_modes": [], "render_fps": 25}

    def __init__(self, family=None, config=None, render_mode=None):
        self.config = config or EnvConfig()
        self.family = None if family is None else TrajectoryFamily(family)
        self.action_space = spaces.Box(low=-1.0, high=1.0, shape=(3,), dtype=np.float64)
        self.observation_space = spaces.Box(low=-np.inf, high=np.inf, shape=(12,), dtype=np.float64)
        assert render_mode is None or render_mode in self.metadata["render_modes"]
        self.render_mode = render_mode

        workspace = self.config.workspace
        self._low = np.asarray(workspace.low)
        self._high = np.asarray(workspace.high)
        self.trajectory = None
        self.point = None
        self.goal = None
        self.done = False
        self.step_idx = 0

    def get_observation(self):
        return np.concatenate([self.point, self.goal.position, self.goal.velocity, self.goal.position - self.point])

    def _info(self):
        distance = float(np.linalg.norm(self.goal.position - self.point))
        return {
            "step": self.step_idx,
            "timestamp": self.step_idx * self.config.robot.control_dt,
            "is_success": False,
            "grasp_success": False,
            "distance": distance,
            "clamped": False,
            "task_id": task_id(self.trajectory.family),
            "family": self.trajectory.family.value,
        }

    def reset(self, seed=None, options=None):
        super().reset(seed=seed, options=options)
        options = options or {}
        family_draw = int(self.np_random.integers(len(self.config.families)))
        spec_seed = int(self.np_random.integers(SEED_SPACE))
        self.trajectory = options.get("trajectory")
        if self.trajectory is None:
            family = options.get("family", self.family) or self.config.families[family_draw]
            ranges = self.config.trajectory_ranges
            dt = self.config.robot.control_dt
            self.trajectory = sample_spec(family, spec_seed, self.config.workspace, ranges, dt=dt)

        self.point = self.config.workspace.center
        self.goal = goal_at(self.trajectory, 0, dt=self.config.robot.control_dt)
        self.done = False
        self.step_idx = 0
        return self.get_observation(), self._info()

    def step(self, action):
        if self.done:
            raise EpisodeDoneError("the episode is over, call reset() before step()")
        action = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        if action.shape != self.action_space.shape:
            raise ValueError(f"expected an action of shape {self.action_space.shape}, got {action.shape}")

        self.point = np.clip(self.point + action * self.config.robot.ee_step_max, self._low, self._high)
        self.step_idx += 1
        self.goal = goal_at(self.trajectory, self.step_idx, dt=self.config.robot.control_dt)

        info = self._info()
        truncated = self.step_idx >= self.config.max_episode_steps
        self.done = truncated
        return StepResult(self.get_observation(), float(precision_reward(info["distance"])), False, truncated, info)

    @property
    def goal_position(self):
        return self.goal.position

    @property
    def gripper_position(self):
        return self.point

    @property
    def base_position(self):
        return 0.0

    def render(self):
        return None
