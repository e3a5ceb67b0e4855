"""Wrapper recording per-step replay traces as plot-ready CSV files."""

import csv
import os

import gymnasium as gym
import numpy as np
from gymnasium import logger

TRACE_COLUMNS = (
    "step",
    "time_s",
    "goal_x",
    "goal_y",
    "goal_z",
    "gripper_x",
    "gripper_y",
    "gripper_z",
    "base_x",
    "d_t",
    "reward",
)


def trace_header(action_dim):
    return list(TRACE_COLUMNS) + [f"action_{i}" for i in range(action_dim)]


def write_trace(path, rows, action_dim):
    """Write trace rows (dicts keyed by ``trace_header``) to ``path``; floats are written with ``repr``."""
    header = trace_header(action_dim)
    with open(path, "w", newline="") as file:
        writer = csv.writer(file)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[key] if key == "step" else repr(float(row[key])) for key in header])


def read_trace(path):
    """Read a trace CSV back into a list of dicts with ``int`` steps and ``float`` values."""
    with open(path, newline="") as file:
        return [
            {key: int(value) if key == "step" else float(value) for key, value in row.items()}
            for row in csv.DictReader(file)
        ]


class TraceRecorder:
    def __init__(self):
        self.trace_file = None
        self.rows = []
        self.action_dim = 0

    def start(self, trace_file, action_dim):
        """Start a new trace, written to ``trace_file`` on `close` (kept in memory only if None)."""
        self.trace_file = trace_file
        self.action_dim = action_dim
        self.rows = []

    def capture_frame(self, env, action, reward, info):
        goal = env.goal_position
        gripper = env.gripper_position
        row = {
            "step": int(info["step"]),
            "time_s": info["timestamp"],
            "goal_x": goal[0],
            "goal_y": goal[1],
            "goal_z": goal[2],
            "gripper_x": gripper[0],
            "gripper_y": gripper[1],
            "gripper_z": gripper[2],
            "base_x": env.base_position,
            "d_t": info["distance"],
            "reward": reward,
        }
        for i, value in enumerate(np.asarray(action, dtype=np.float64)):
            row[f"action_{i}"] = value
        self.rows.append(row)

    def close(self):
        """Write the trace file if one was requested."""
        if self.trace_file is not None and self.rows:
            write_trace(self.trace_file, self.rows, self.action_dim)
            logger.info(f"Wrote {len(self.rows)} trace rows to {self.trace_file}")
        self.trace_file = None


class RecordTraceWrapper(gym.Wrapper):
    """Record step, time, goal, gripper, base, distance, reward and the commanded action of every step.

    One ``episode_<k>.csv`` per episode goes to ``trace_folder``; with ``trace_folder=None`` the last
    episode is only kept in ``self.trace``.
    """

    def __init__(self, env: gym.Env, trace_folder: str = None, name_prefix: str = "episode"):
        gym.Wrapper.__init__(self, env)

        self.trace_folder = None if trace_folder is None else os.path.abspath(trace_folder)
        self.trace_recorder = TraceRecorder()
        self.name_prefix = name_prefix
        self.episode_id = 0

        # Create output folder if needed
        if self.trace_folder is not None:
            if os.path.isdir(self.trace_folder):
                logger.warn(
                    f"Overwriting existing traces at {self.trace_folder} folder "
                    f"(try specifying a different `trace_folder` for the `RecordTrace` wrapper if this is not desired)"
                )
            os.makedirs(self.trace_folder, exist_ok=True)

    @property
    def trace(self):
        return self.trace_recorder.rows

    def reset(self, **kwargs):
        """Reset the environment using kwargs and start a new trace."""
        observation, info = self.env.reset(**kwargs)
        self.start_trace_recorder()
        return observation, info

    def start_trace_recorder(self):
        self.trace_recorder.close()
        trace_file = None
        if self.trace_folder is not None:
            trace_file = os.path.join(self.trace_folder, f"{self.name_prefix}_{self.episode_id}.csv")
        self.trace_recorder.start(trace_file, self.action_space.shape[0])
        self.episode_id += 1

    def step(self, action):
        """Step through the environment, recording the commanded action and the resulting positions."""
        observation, reward, terminated, truncated, info = self.env.step(action)
        self.trace_recorder.capture_frame(self.env.unwrapped, action, reward, info)
        if terminated or truncated:
            self.trace_recorder.close()
        return observation, reward, terminated, truncated, info

    def close(self):
        """Close the wrapper then the trace recorder."""
        super().close()
        self.trace_recorder.close()
