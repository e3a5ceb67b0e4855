import dataclasses
import os

import pytest

from gym_mobile_manipulation.config import OUTPUT_DIR_ENV, RunConfig, default_output_dir
from gym_mobile_manipulation.envs import TaskKind
from gym_mobile_manipulation.errors import ConfigError
from gym_mobile_manipulation.trajectories import TrajectoryFamily

EXAMPLE = """
# grasping on two families
run.task = grasping
run.output_dir = runs/grasp   # trailing comment
env.families = circle, helix
env.task_onehot = true
workspace.high = 1.0, 0.5, 0.8
traj.speed = 0.05, 0.2
robot.ee_step_max = 0.04
dynamics.lag_alpha = 0.7, 1.0
noise.sigma_obs = 0.0
ppo.seeds = 1, 2
ppo.n_envs = 8
"""


def test_defaults():
    config = RunConfig()
    assert config.task is TaskKind.TRACKING
    assert config.ppo.seeds == (123, 456, 789)
    assert config.ppo.learning_rate == 5e-5
    assert config.env.noise.sigma_action == 0.01
    assert config.env.r_grasp == 50.0
    assert len(config.env.families) == 6


def test_loads_overrides_defaults():
    config = RunConfig.loads(EXAMPLE)
    assert config.task is TaskKind.GRASPING
    assert config.output_dir == "runs/grasp"
    assert config.env.families == (TrajectoryFamily.CIRCLE, TrajectoryFamily.HELIX)
    assert config.env.task_onehot is True
    assert config.env.workspace.high == (1.0, 0.5, 0.8)
    assert config.env.workspace.low == (0.0, 0.0, 0.1)
    assert config.env.trajectory_ranges.speed == (0.05, 0.2)
    assert config.env.robot.ee_step_max == 0.04
    assert config.env.dynamics.lag_alpha == (0.7, 1.0)
    assert config.env.noise.sigma_obs == 0.0
    assert config.ppo.seeds == (1, 2)
    assert config.ppo.n_envs == 8
    assert config.ppo.rollout_len == 200


def test_dump_parses_back():
    config = RunConfig.loads(EXAMPLE)
    assert RunConfig.loads(config.dumps()) == config


def test_dump_lists_every_section():
    sections = {line.split(".", 1)[0] for line in RunConfig().dumps().splitlines()}
    assert sections == {"run", "env", "workspace", "traj", "robot", "dynamics", "noise", "ppo"}


@pytest.mark.parametrize(
    "text, line",
    [
        ("run.task = tracking\nenv.unknown = 1\n", 2),
        ("\n\nnoise.sigma_obs 0.1\n", 3),
        ("ppo.n_envs = many\n", 1),
        ("env.task_onehot = maybe\n", 1),
        ("workspace.low = 0.0, 0.1\n", 1),
        ("bogus.key = 1\n", 1),
        ("run.task = flying\n", 1),
    ],
)
def test_bad_lines_name_the_line_number(text, line):
    with pytest.raises(ConfigError, match=f"line {line}"):
        RunConfig.loads(text)


def test_invalid_values_are_config_errors():
    with pytest.raises(ConfigError):
        RunConfig.loads("ppo.gamma = 1.5\n")


def test_hash_ignores_the_output_directory():
    config = RunConfig(output_dir="a")
    assert config.config_hash() == dataclasses.replace(config, output_dir="b").config_hash()
    assert config.config_hash() != config.with_seeds([9]).config_hash()
    assert len(config.config_hash()) == 64


def test_save_and_load_file(tmp_path):
    path = tmp_path / "run.cfg"
    config = RunConfig.loads(EXAMPLE)
    config.save(path)
    assert RunConfig.from_file(path) == config


def test_output_dir_from_environment(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert default_output_dir() == "runs"
    assert RunConfig().output_dir == "runs"
    monkeypatch.setenv(OUTPUT_DIR_ENV, "/tmp/elsewhere")
    assert RunConfig().output_dir == "/tmp/elsewhere"
    assert RunConfig.loads("").output_dir == "/tmp/elsewhere"


CONFIGS_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")
EXPERIMENTS = ["circle_tracking", "multitask_tracking", "multitask_grasping", "noise_free_tracking"]


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_experiment_configs_load(name):
    config = RunConfig.from_file(os.path.join(CONFIGS_DIR, f"{name}.cfg"))
    assert config.output_dir == f"runs/{name}"
    assert TrajectoryFamily.RANDOM_COMPOSITE not in config.env.families
    assert config.ppo.total_env_steps <= 6_000_000


def test_noise_free_config_turns_off_noise_and_randomization():
    config = RunConfig.from_file(os.path.join(CONFIGS_DIR, "noise_free_tracking.cfg"))
    assert config.env.noise.sigma_action == config.env.noise.sigma_obs == 0.0
    assert not config.env.randomize_dynamics
    baseline = RunConfig.from_file(os.path.join(CONFIGS_DIR, "multitask_tracking.cfg"))
    assert config.env.families == baseline.env.families
