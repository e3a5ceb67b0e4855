"""Evaluation of policies per trajectory family, report tables and replay traces."""

import csv
import dataclasses
import io
import os
from dataclasses import dataclass, field

import numpy as np
from gymnasium import logger

from gym_mobile_manipulation.checkpoint import load_checkpoint
from gym_mobile_manipulation.config import RunConfig
from gym_mobile_manipulation.envs import TaskKind
from gym_mobile_manipulation.envs.wrappers import RecordTraceWrapper, write_trace
from gym_mobile_manipulation.errors import ConfigHashMismatchError
from gym_mobile_manipulation.noise import NoiseConfig
from gym_mobile_manipulation.policies import MlpPolicy
from gym_mobile_manipulation.ppo import make_env
from gym_mobile_manipulation.trajectories import SEED_SPACE, TrajectoryFamily, TrajectorySpec

STEADY_STATE_START = 50
EVAL_FAMILIES = tuple(TrajectoryFamily)


@dataclass
class EpisodeResult:
    distances: np.ndarray
    rewards: np.ndarray
    grasp_success: bool

    @property
    def length(self):
        return len(self.distances)

    @property
    def tracking_error(self):
        return float(np.mean(self.distances))

    @property
    def steady_state_error(self):
        return steady_state_error(self.distances)

    @property
    def total_reward(self):
        return float(np.sum(self.rewards))


def steady_state_error(distances, start=STEADY_STATE_START):
    """Mean distance over steps ``start..end`` (``distances[k]`` is the distance after step ``k + 1``).

    Episodes that end before ``start`` (early grasps) report their final distance.
    """
    distances = np.asarray(distances, dtype=np.float64)
    if len(distances) < start:
        return float(distances[-1])
    return float(np.mean(distances[start - 1 :]))


@dataclass
class FamilyStats:
    family: str
    steady_state_error: float
    grasp_success_rate: float
    mean_error: float
    median_error: float
    mean_reward: float
    episodes: int

    @classmethod
    def from_episodes(cls, family, results):
        if not results:
            raise ValueError(f"no episodes for family {family}")
        errors = [r.tracking_error for r in results]
        return cls(
            family=TrajectoryFamily(family).value,
            episodes=len(results),
            steady_state_error=float(np.mean([r.steady_state_error for r in results])),
            grasp_success_rate=float(np.mean([r.grasp_success for r in results])),
            mean_error=float(np.mean(errors)),
            median_error=float(np.median(errors)),
            mean_reward=float(np.mean([r.total_reward for r in results])),
        )


@dataclass
class EvalReport:
    task: str
    rows: list[FamilyStats] = field(default_factory=list)
    config_hash: str = ""
    checkpoint_id: str = ""

    def __getitem__(self, family):
        family = TrajectoryFamily(family).value
        for row in self.rows:
            if row.family == family:
                return row
        raise KeyError(family)


def run_episode(env, policy, seed, family=None, trajectory=None):
    """Roll out one episode with a deterministic policy."""
    if trajectory is not None:
        options = {"trajectory": trajectory}
    else:
        options = {"family": family} if family is not None else None
    observation, _ = env.reset(seed=seed, options=options)
    distances, rewards = [], []
    grasp_success = False
    done = False
    while not done:
        observation, reward, terminated, truncated, info = env.step(policy(observation))
        distances.append(info["distance"])
        rewards.append(reward)
        grasp_success = grasp_success or bool(info["grasp_success"])
        done = terminated or truncated
    return EpisodeResult(np.array(distances), np.array(rewards), grasp_success)


def without_noise(env_config):
    return dataclasses.replace(env_config, noise=NoiseConfig(sigma_action=0.0, sigma_obs=0.0))


def evaluate_policy(
    policy, task, families=EVAL_FAMILIES, episodes_per_family=100, env_config=None, noise_on=True, seed=0
):
    """Per-family statistics of ``episodes_per_family`` fresh episodes each.

    Episode seeds of the family at index ``i`` in ``families`` are drawn from
    ``SeedSequence((seed, i))``, so a fixed seed gives an identical report.
    """
    if episodes_per_family < 1:
        raise ValueError(f"episodes_per_family must be >= 1, got {episodes_per_family}")
    task = TaskKind(task)
    env_config = env_config or RunConfig().env
    if not noise_on:
        env_config = without_noise(env_config)

    env = make_env(task, config=env_config)
    rows = []
    for index, family in enumerate(families):
        rng = np.random.default_rng(np.random.SeedSequence((seed, index)))
        results = [
            run_episode(env, policy, int(rng.integers(SEED_SPACE)), family=family) for _ in range(episodes_per_family)
        ]
        rows.append(FamilyStats.from_episodes(family, results))
        logger.info(f"Evaluated {family}: steady-state error {rows[-1].steady_state_error:.3f} m")
    env.close()
    return EvalReport(task=task.value, rows=rows)


def evaluate(
    checkpoint_path, run_config=None, families=EVAL_FAMILIES, episodes_per_family=100, noise_on=True, seed=0
):
    """Evaluate the mean-action policy of a checkpoint.

    Without ``run_config`` the config stored in the checkpoint is used.

    :raises ConfigHashMismatchError: ``run_config`` differs from the config the checkpoint was trained with
    """
    checkpoint = load_checkpoint(checkpoint_path)
    if run_config is None:
        run_config = RunConfig.loads(checkpoint.config_text)
    elif run_config.config_hash() != checkpoint.config_hash:
        raise ConfigHashMismatchError(checkpoint.config_hash, run_config.config_hash())

    report = evaluate_policy(
        MlpPolicy(checkpoint.params),
        run_config.task,
        families=families,
        episodes_per_family=episodes_per_family,
        env_config=run_config.env,
        noise_on=noise_on,
        seed=seed,
    )
    report.config_hash = checkpoint.config_hash
    report.checkpoint_id = checkpoint.checkpoint_id
    return report


REPORT_COLUMNS = [f.name for f in dataclasses.fields(FamilyStats)]
_RATE_COLUMNS = ("grasp_success_rate",)


def _format_cell(name, value):
    if name == "family":
        return value
    if name == "episodes":
        return str(value)
    if name in _RATE_COLUMNS:
        return f"{value:.2f}"
    return f"{value:.3f}"


def report(eval_report, fmt="csv"):
    """Render a report as CSV or as an aligned text table.

    Columns are fixed: family, steady-state error (m, 3 decimals), grasp success rate (2 decimals),
    mean and median error (m), mean episode reward and the episode count.
    """
    header = REPORT_COLUMNS
    rows = [[_format_cell(c, getattr(row, c)) for c in header] for row in eval_report.rows]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()
    if fmt == "pretty":
        widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
        lines = [
            "  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(line, widths)))
            for line in [header] + rows
        ]
        lines.insert(1, "  ".join("-" * w for w in widths))
        title = f"task: {eval_report.task}"
        if eval_report.checkpoint_id:
            title += f"  checkpoint: {eval_report.checkpoint_id}"
        return "\n".join([title] + lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}, expected 'csv' or 'pretty'")


def parse_report_csv(text, task=""):
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for row in reader:
        values = {
            name: row[name] if name == "family" else (int(row[name]) if name == "episodes" else float(row[name]))
            for name in REPORT_COLUMNS
        }
        rows.append(FamilyStats(**values))
    return EvalReport(task=task, rows=rows)


def trajectory_path(trace_path):
    return os.path.splitext(trace_path)[0] + ".traj"


def write_trajectory(path, trajectory):
    """Store a trajectory as ``name = value`` lines next to its trace."""
    with open(path, "w") as file:
        for name, value in trajectory.to_fields().items():
            file.write(f"{name} = {value}\n")


def read_trajectory(path):
    values = {}
    with open(path) as file:
        for line in file:
            if line.strip():
                name, _, value = line.partition("=")
                values[name.strip()] = value.strip()
    return TrajectorySpec.from_fields(values)


def replay(policy, task, seed, family=None, env_config=None, path=None):
    """Run one recorded episode and return its trace rows.

    With ``path`` the rows are written as CSV and the episode's trajectory to ``trajectory_path(path)``.
    """
    env = make_env(task, family=family, config=env_config or RunConfig().env)
    wrapper = RecordTraceWrapper(env)
    run_episode(wrapper, policy, seed)
    rows = list(wrapper.trace)
    if path is not None:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        write_trace(path, rows, env.action_space.shape[0])
        write_trajectory(trajectory_path(path), env.unwrapped.trajectory)
        logger.info(f"Wrote replay of {len(rows)} steps to {path}")
    wrapper.close()
    return rows


def resimulate(rows, task, seed, family=None, env_config=None, trajectory=None):
    """Replay the action columns of a trace; returns ``(goal, gripper)`` position arrays, one row per step.

    Passing the recorded ``trajectory`` pins the goal path, otherwise it is redrawn from ``seed``.
    """
    env = make_env(task, family=family, config=env_config or RunConfig().env)
    action_keys = sorted((key for key in rows[0] if key.startswith("action_")), key=lambda k: int(k.split("_")[1]))
    env.reset(seed=seed, options={"trajectory": trajectory} if trajectory is not None else None)
    goals, grippers = [], []
    for row in rows:
        env.step(np.array([row[key] for key in action_keys]))
        goals.append(np.array(env.goal_position, copy=True))
        grippers.append(np.array(env.gripper_position, copy=True))
    env.close()
    return np.array(goals), np.array(grippers)


@dataclass
class RobustnessRow:
    name: str
    nominal_error: float
    widened_error: float

    @property
    def degradation(self):
        """Relative increase of the steady-state error under widened randomization."""
        return (self.widened_error - self.nominal_error) / self.nominal_error


def robustness_report(
    policies, task, families=EVAL_FAMILIES, episodes_per_family=100, env_config=None, widen=1.5, seed=0
):
    """Steady-state error of each named policy under nominal and widened dynamics randomization."""
    env_config = env_config or RunConfig().env
    widened = dataclasses.replace(
        env_config, randomize_dynamics=True, dynamics=env_config.dynamics.widened(widen)
    )
    nominal = dataclasses.replace(env_config, randomize_dynamics=True)
    rows = []
    for name, policy in policies.items():
        errors = []
        for config in (nominal, widened):
            result = evaluate_policy(policy, task, families, episodes_per_family, env_config=config, seed=seed)
            errors.append(float(np.mean([row.steady_state_error for row in result.rows])))
        rows.append(RobustnessRow(name, *errors))
        logger.info(f"{name}: nominal {errors[0]:.3f} m, widened {errors[1]:.3f} m")
    return rows


def robustness_csv(rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["policy", "nominal_error", "widened_error", "degradation"])
    for row in rows:
        writer.writerow([row.name, f"{row.nominal_error:.3f}", f"{row.widened_error:.3f}", f"{row.degradation:.2f}"])
    return buffer.getvalue()


STATS_COLUMNS = ("iteration", "env_steps", "mean_reward", "tracking_error", "grasp_success_rate")


def stats_report(stats, fmt="pretty"):
    """Training curve table (one row per iteration) from a list of ``TrainStats``."""
    rows = [
        [
            str(row.iteration),
            str(row.env_steps),
            f"{row.mean_reward:.3f}",
            f"{row.tracking_error:.3f}",
            f"{row.grasp_success_rate:.2f}",
        ]
        for row in stats
    ]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(STATS_COLUMNS)
        writer.writerows(rows)
        return buffer.getvalue()
    if fmt != "pretty":
        raise ValueError(f"unknown report format {fmt!r}, expected 'csv' or 'pretty'")
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(STATS_COLUMNS)]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in [list(STATS_COLUMNS)] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
