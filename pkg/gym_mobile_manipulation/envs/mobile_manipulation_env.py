import enum
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np
from gymnasium import Env, spaces

from gym_mobile_manipulation.errors import EpisodeDoneError
from gym_mobile_manipulation.noise import NoiseConfig, inject_noise
from gym_mobile_manipulation.simulated_robot import (
    DynamicsParams,
    DynamicsRanges,
    RobotParams,
    SimulatedRobot,
    randomize_dynamics,
)
from gym_mobile_manipulation.trajectories import (
    BASIC_FAMILIES,
    SEED_SPACE,
    TrajectoryFamily,
    TrajectoryRanges,
    Workspace,
    goal_at,
    sample_spec,
)

OBS_DIM = 23
N_TASKS = len(BASIC_FAMILIES)


class TaskKind(str, enum.Enum):
    TRACKING = "tracking"
    GRASPING = "grasping"
    # toy point-mass tracking, a sanity check for the learner
    POINT_TRACKING = "point_tracking"

    @property
    def action_dim(self):
        return {"tracking": 4, "grasping": 5, "point_tracking": 3}[self.value]


@dataclass(frozen=True)
class EnvConfig:
    families: tuple[TrajectoryFamily, ...] = BASIC_FAMILIES
    r_grasp: float = 50.0
    task_onehot: bool = False
    randomize_dynamics: bool = True
    max_episode_steps: int = 200
    workspace: Workspace = Workspace()
    trajectory_ranges: TrajectoryRanges = TrajectoryRanges()
    robot: RobotParams = RobotParams()
    dynamics: DynamicsRanges = DynamicsRanges()
    noise: NoiseConfig = NoiseConfig()

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(TrajectoryFamily(f) for f in self.families))
        if not self.families:
            raise ValueError("at least one trajectory family is required")
        if self.max_episode_steps < 1:
            raise ValueError(f"max_episode_steps must be positive, got {self.max_episode_steps}")


class StepResult(NamedTuple):
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: dict[str, Any]

    @property
    def done(self):
        return self.terminated or self.truncated


def precision_reward(distance):
    """Negative distance plus a sharp bonus near contact: ``-d + exp(-100 d^2)``, equal to 1 at ``d = 0``."""
    return -distance + np.exp(-100.0 * distance**2)


def episode_return(rewards):
    """Undiscounted sum of an episode's rewards."""
    return float(np.sum(np.asarray(rewards, dtype=np.float64)))


def task_id(family):
    """Index of a basic family in ``BASIC_FAMILIES``; -1 for the random composite."""
    family = TrajectoryFamily(family)
    return BASIC_FAMILIES.index(family) if family.is_basic else -1


def one_hot(task_index):
    out = np.zeros(N_TASKS)
    if task_index >= 0:
        out[task_index] = 1.0
    return out


class MobileManipulationEnv(Env):
    """
    ## Description

    A mobile manipulator (a base sliding along x carrying a pan + two-link arm) has to follow an
    object moving along a random trajectory. In the tracking task it keeps its gripper on the object
    for the whole episode; in the grasping task it also has to close the gripper on it. Episodes
    last 200 steps of 0.04 s; a grasping episode ends early on a successful grasp.

    ## Action space

    Incremental position control of the gripper and linear position control of the base. The
    grasping task adds a binary gripper command.

    | Index | Action     | Type (unit)   | Min  | Max |
    | ----- | ---------- | ------------- | ---- | --- |
    | 0     | Gripper dx | Float (step)  | -1.0 | 1.0 |
    | 1     | Gripper dy | Float (step)  | -1.0 | 1.0 |
    | 2     | Gripper dz | Float (step)  | -1.0 | 1.0 |
    | 3     | Base dx    | Float (step)  | -1.0 | 1.0 |
    | 4     | Gripper    | Float (>0 closes), grasping only | -1.0 | 1.0 |

    A unit action moves by ``ee_step_max`` / ``base_step_max`` metres per step, before the
    randomized actuation gain, speed scales and command lag.

    ## Observation space

    | Index | Observation                                | Unit  |
    | ----- | ------------------------------------------ | ----- |
    | 0     | Base position                              | m     |
    | 1-3   | Arm joint angles                           | rad   |
    | 4     | Base velocity                              | m/s   |
    | 5-7   | Arm joint velocities                       | rad/s |
    | 8-10  | Gripper position                           | m     |
    | 11-13 | Object position                            | m     |
    | 14-16 | Object velocity                            | m/s   |
    | 17-19 | Object position - gripper position         | m     |
    | 20-22 | Object velocity - gripper velocity         | m/s   |
    | 23-28 | One-hot trajectory family (`task_onehot`)  |       |

    ## Reward

    ``-d + exp(-100 d^2)`` where ``d`` is the gripper-object distance, plus ``r_grasp`` on the step
    of a successful grasp.

    ## Arguments

    - `task (str)`: "tracking" or "grasping".
    - `family (str)`: trajectory family of every episode; sampled from `config.families` if None.
    - `config (EnvConfig)`: workspace, sampling ranges, robot limits, noise and randomization.
    - `render_mode (str)`: no render mode is available, must be None.

    ``reset`` also takes ``options={"family": ...}`` or ``options={"trajectory": TrajectorySpec}``.
    """

    metadata = {"render_modes": [], "render_fps": 25}

    def __init__(self, task="tracking", family=None, config=None, render_mode=None):
        self.task = TaskKind(task)
        if self.task is TaskKind.POINT_TRACKING:
            raise ValueError("use PointTrackingEnv for the point-mass task")
        self.config = config or EnvConfig()
        self.family = None if family is None else TrajectoryFamily(family)
        self.robot = SimulatedRobot(self.config.robot)

        self.action_space = spaces.Box(low=-1.0, high=1.0, shape=(self.task.action_dim,), dtype=np.float64)
        obs_dim = OBS_DIM + (N_TASKS if self.config.task_onehot else 0)
        self.observation_space = spaces.Box(low=-np.inf, high=np.inf, shape=(obs_dim,), dtype=np.float64)

        assert render_mode is None or render_mode in self.metadata["render_modes"]
        self.render_mode = render_mode

        self.home_target = self.config.workspace.center
        self.trajectory = None
        self.task_index = -1
        self.done = False
        self.step_idx = 0
        self.info = {}

    def _choose_trajectory(self, options):
        family_draw = int(self.np_random.integers(len(self.config.families)))
        spec_seed = int(self.np_random.integers(SEED_SPACE))
        if options.get("trajectory") is not None:
            return options["trajectory"]
        family = options.get("family", self.family)
        if family is None:
            family = self.config.families[family_draw]
        return sample_spec(
            family,
            spec_seed,
            self.config.workspace,
            self.config.trajectory_ranges,
            dt=self.config.robot.control_dt,
        )

    def get_observation(self):
        state = self.robot.state
        observation = np.concatenate(
            [
                [state.base_x],
                state.q,
                [state.qd_base],
                state.qd,
                state.gripper_pos,
                state.object_pos,
                state.object_vel,
                state.object_pos - state.gripper_pos,
                state.object_vel - state.gripper_vel,
            ]
        )
        noise = self.config.noise
        observation = inject_noise(observation, noise.sigma_obs, noise.clip_k, self.np_random)
        if self.config.task_onehot:
            observation = np.concatenate([observation, one_hot(self.task_index)])
        return observation

    def _distance(self):
        state = self.robot.state
        return float(np.linalg.norm(state.object_pos - state.gripper_pos))

    def _update_info(self, grasp_success):
        self.info = {
            "step": self.step_idx,
            "timestamp": self.step_idx * self.config.robot.control_dt,
            "is_success": grasp_success,
            "grasp_success": grasp_success,
            "distance": self._distance(),
            "clamped": self.robot.state.clamped,
            "task_id": self.task_index,
            "family": self.trajectory.family.value,
        }
        return dict(self.info)

    def reset(self, seed=None, options=None):
        # We need the following line to seed self.np_random
        super().reset(seed=seed, options=options)
        options = options or {}

        self.trajectory = self._choose_trajectory(options)
        dynamics_seed = int(self.np_random.integers(SEED_SPACE))
        if self.config.randomize_dynamics:
            dynamics = randomize_dynamics(dynamics_seed, self.config.dynamics)
        else:
            dynamics = DynamicsParams()

        # Robot at the fixed home pose, object at the start of its trajectory
        start = goal_at(self.trajectory, 0, dt=self.config.robot.control_dt).position
        self.robot.reset(self.home_target, start, dynamics=dynamics, base_x=0.0)
        self.task_index = task_id(self.trajectory.family)
        self.done = False
        self.step_idx = 0

        return self.get_observation(), self._update_info(False)

    def step(self, action):
        if self.done:
            raise EpisodeDoneError("the episode is over, call reset() before step()")
        action = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        if action.shape != self.action_space.shape:
            raise ValueError(f"expected an action of shape {self.action_space.shape}, got {action.shape}")

        # Perform the noisy action, then move the object along its trajectory
        noise = self.config.noise
        self.robot.apply_action(inject_noise(action, noise.sigma_action, noise.clip_k, self.np_random))
        self.robot.move_object(self.trajectory)
        self.step_idx = self.robot.state.step_index

        grasp_success = self.task is TaskKind.GRASPING and self.robot.latch_grasp()
        distance = self._distance()
        reward = precision_reward(distance)
        if grasp_success:
            reward += self.config.r_grasp

        terminated = grasp_success
        truncated = self.step_idx >= self.config.max_episode_steps
        self.done = terminated or truncated
        observation = self.get_observation()
        return StepResult(observation, float(reward), terminated, truncated, self._update_info(grasp_success))

    @property
    def goal_position(self):
        return self.robot.state.object_pos

    @property
    def gripper_position(self):
        return self.robot.state.gripper_pos

    @property
    def base_position(self):
        return self.robot.state.base_x

    def render(self):
        return None

    def close(self):
        pass
