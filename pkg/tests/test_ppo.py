import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

from gym_mobile_manipulation import ppo
from gym_mobile_manipulation.checkpoint import load_checkpoint
from gym_mobile_manipulation.config import RunConfig
from gym_mobile_manipulation.envs import EnvConfig, TaskKind
from gym_mobile_manipulation.envs.mobile_manipulation_env import precision_reward
from gym_mobile_manipulation.errors import NonFiniteLossError
from gym_mobile_manipulation.evaluation import evaluate_policy
from gym_mobile_manipulation.net import AdamState, MlpSpec, forward, init_params, log_prob
from gym_mobile_manipulation.policies import MlpPolicy
from gym_mobile_manipulation.ppo import (
    PpoConfig,
    append_stats,
    clipped_surrogate,
    collect_rollouts,
    compute_gae,
    ppo_loss,
    ppo_update,
    read_stats,
    snapshot_path,
    standardize,
    train,
    write_stats,
)
from gym_mobile_manipulation.selftest import gae_brute_force
from gym_mobile_manipulation.trajectories import BASIC_FAMILIES

SMALL = PpoConfig(
    rollout_len=40, n_envs=2, epochs_per_update=2, minibatch_size=40, total_env_steps=240, seeds=(3,), hidden=(16, 16)
)


def _params(obs_dim=23, action_dim=4, seed=0):
    return init_params(MlpSpec(obs_dim, action_dim, (16, 16)), MlpSpec(obs_dim, 1, (16, 16)), seed)


def _without_wall_time(stats):
    return [dataclasses.replace(row, wall_time_s=0.0) for row in stats]


def test_gae_monte_carlo_closed_form():
    rng = np.random.default_rng(0)
    rewards, values = rng.normal(size=12), rng.normal(size=12)
    advantages, returns = compute_gae(rewards, values, np.zeros(12), 0.0, gamma=1.0, gae_lambda=1.0)
    np.testing.assert_allclose(advantages, np.cumsum(rewards[::-1])[::-1] - values, atol=1e-12)
    np.testing.assert_allclose(returns, np.cumsum(rewards[::-1])[::-1], atol=1e-12)


def test_gae_one_step_closed_form():
    rng = np.random.default_rng(1)
    rewards, values = rng.normal(size=10), rng.normal(size=10)
    dones = np.zeros(10, dtype=bool)
    dones[4] = True
    advantages, _ = compute_gae(rewards, values, dones, 0.7, gamma=0.9, gae_lambda=0.0)
    next_values = np.append(values[1:], 0.7) * ~dones
    np.testing.assert_allclose(advantages, rewards + 0.9 * next_values - values, atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_gae_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = 20
    rewards, values = rng.normal(size=n), rng.normal(size=n)
    dones = rng.random(n) < 0.15
    bootstrap = float(rng.normal())
    advantages, _ = compute_gae(rewards, values, dones, bootstrap, 0.99, 0.95)
    expected = gae_brute_force(rewards, values, dones, bootstrap, 0.99, 0.95)
    np.testing.assert_allclose(advantages, expected, atol=1e-10)


def test_gae_runs_row_wise_on_batches():
    rng = np.random.default_rng(2)
    rewards, values = rng.normal(size=(3, 15)), rng.normal(size=(3, 15))
    dones = rng.random((3, 15)) < 0.2
    bootstrap = rng.normal(size=3)
    advantages, _ = compute_gae(rewards, values, dones, bootstrap, 0.99, 0.95)
    for k in range(3):
        row, _ = compute_gae(rewards[k], values[k], dones[k], bootstrap[k], 0.99, 0.95)
        np.testing.assert_array_equal(advantages[k], row)


def test_clip_arithmetic():
    assert clipped_surrogate(1.5, 1.0, 0.2) == pytest.approx(1.2)
    assert clipped_surrogate(0.5, -1.0, 0.2) == pytest.approx(-0.8)
    mean = np.mean(clipped_surrogate([0.7, 1.0, 1.4], [-1.0, 2.0, 1.0], 0.2))
    assert abs(mean - 0.8) <= 1e-12


def test_surrogate_is_flat_outside_the_clip_range():
    ratios = np.array([1.3, 1.6, 3.0])
    np.testing.assert_array_equal(clipped_surrogate(ratios, np.ones(3), 0.2), np.full(3, 1.2))
    ratios = np.array([0.1, 0.5, 0.79])
    np.testing.assert_array_equal(clipped_surrogate(ratios, -np.ones(3), 0.2), np.full(3, -0.8))


def test_standardize():
    advantages = standardize(np.random.default_rng(3).normal(5.0, 3.0, size=1000))
    assert abs(advantages.mean()) <= 1e-10
    assert abs(advantages.std() - 1.0) <= 1e-10
    np.testing.assert_array_equal(standardize(np.array([2.5])), [0.0])


def test_first_epoch_ratio_is_one():
    rng = np.random.default_rng(4)
    params = _params()
    observations = rng.normal(size=(8, 23))
    actions = rng.uniform(-1, 1, size=(8, 4))
    tape = forward(params, observations)
    old_log_probs = log_prob(tape.mean, tape.log_std, actions)
    advantages = rng.normal(size=8)
    _, _, info = ppo_loss(params, observations, actions, old_log_probs, advantages, np.zeros(8), PpoConfig())
    assert info.clip_fraction == 0.0
    assert info.approx_kl == 0.0
    assert info.policy_loss == pytest.approx(-advantages.mean(), abs=1e-12)


def test_collect_rollouts_batch_shape_and_families():
    config = dataclasses.replace(SMALL, n_envs=6, rollout_len=200)
    batch = collect_rollouts(_params(), TaskKind.TRACKING, EnvConfig(), config, seed=1, iteration=1)
    assert batch.n_transitions == 1200
    assert batch.observations.shape == (6, 200, 23)
    assert batch.actions.shape == (6, 200, 4)
    assert set(np.unique(batch.task_ids)) == set(range(6))
    # one 200-step episode per env
    assert batch.dones[:, -1].all() and not batch.dones[:, :-1].any()
    np.testing.assert_array_equal(batch.bootstrap, np.zeros(6))
    assert batch.episode_returns.shape == (6,)


def test_collect_rollouts_is_deterministic():
    args = (_params(action_dim=5), TaskKind.GRASPING, EnvConfig(), dataclasses.replace(SMALL, n_envs=3), 7, 2)
    first = collect_rollouts(*args)
    second = collect_rollouts(*args)
    for f in dataclasses.fields(first):
        np.testing.assert_array_equal(getattr(first, f.name), getattr(second, f.name))
    third = collect_rollouts(*args[:5], 3)
    assert not np.array_equal(first.actions, third.actions)


def test_collect_rollouts_does_not_depend_on_workers():
    config = dataclasses.replace(SMALL, n_envs=4, rollout_len=20)
    params = _params()
    serial = collect_rollouts(params, TaskKind.TRACKING, EnvConfig(), config, seed=5, iteration=1)
    with ProcessPoolExecutor(max_workers=2) as executor:
        parallel = collect_rollouts(params, TaskKind.TRACKING, EnvConfig(), config, 5, 1, executor=executor)
    for f in dataclasses.fields(serial):
        np.testing.assert_array_equal(getattr(serial, f.name), getattr(parallel, f.name))


def test_unfinished_segment_is_bootstrapped():
    config = dataclasses.replace(SMALL, n_envs=1, rollout_len=30)
    batch = collect_rollouts(_params(), TaskKind.TRACKING, EnvConfig(), config, seed=0, iteration=1)
    assert not batch.dones.any()
    assert batch.bootstrap[0] != 0.0
    assert batch.episode_returns.size == 0


def test_ppo_update_changes_parameters():
    params = _params()
    batch = collect_rollouts(params, TaskKind.TRACKING, EnvConfig(), SMALL, seed=0, iteration=1)
    adam = AdamState.zeros(params, learning_rate=1e-3)
    new_params, new_adam, info = ppo_update(params, adam, batch, SMALL, np.random.default_rng(0))
    # 80 transitions, minibatches of 40, two epochs
    assert new_adam.step == 4
    assert not np.array_equal(new_params["pi.w0"], params["pi.w0"])
    assert np.isfinite(info.loss)


def test_non_finite_loss_aborts_the_update():
    params = _params()
    batch = collect_rollouts(params, TaskKind.TRACKING, EnvConfig(), SMALL, seed=0, iteration=1)
    batch.rewards[0, 0] = np.nan
    with pytest.raises(NonFiniteLossError) as error:
        ppo_update(params, AdamState.zeros(params), batch, SMALL, np.random.default_rng(0), iteration=4)
    assert error.value.terms["iteration"] == 4


def test_invalid_config_is_rejected():
    with pytest.raises(ValueError):
        PpoConfig(gamma=0.0)
    with pytest.raises(ValueError):
        PpoConfig(clip_eps=0.0)
    with pytest.raises(ValueError):
        PpoConfig(rollout_len=0)


def test_iteration_count():
    assert PpoConfig().steps_per_iteration == 6000
    assert PpoConfig().n_iterations == 1000
    assert SMALL.n_iterations == 3


def test_one_update_when_budget_is_one_batch(tmp_path):
    run = RunConfig(ppo=dataclasses.replace(SMALL, total_env_steps=80))
    result = train(run, output_dir=str(tmp_path))
    assert len(result.stats[3]) == 1
    assert result.stats[3][0].env_steps == 80
    assert os.path.exists(tmp_path / "checkpoint_seed3.h5")
    assert len(read_stats(tmp_path / "progress_seed3.csv")) == 1
    assert len(read_stats(tmp_path / "progress_mean.csv")) == 1


def test_training_is_reproducible(tmp_path):
    run = RunConfig(ppo=SMALL)
    first = train(run, output_dir=str(tmp_path / "a"))
    second = train(run, output_dir=str(tmp_path / "b"))
    assert len(first.stats[3]) == 3
    assert _without_wall_time(first.stats[3]) == _without_wall_time(second.stats[3])
    for name in first.params[3].names:
        np.testing.assert_array_equal(first.params[3][name], second.params[3][name])


def test_seed_stats_are_averaged(tmp_path):
    run = RunConfig(ppo=dataclasses.replace(SMALL, seeds=(3, 4), total_env_steps=80))
    result = train(run, output_dir=str(tmp_path))
    expected = (result.stats[3][0].mean_reward + result.stats[4][0].mean_reward) / 2
    assert result.mean_stats[0].mean_reward == pytest.approx(expected)


def test_resume_continues_an_interrupted_run(tmp_path, monkeypatch):
    run = RunConfig(ppo=dataclasses.replace(SMALL, checkpoint_every=1))
    reference = train(run, output_dir=str(tmp_path / "reference"))

    original = ppo.collect_rollouts

    def interrupted(params, task, env_config, config, seed, iteration, executor=None):
        if iteration == 3:
            raise RuntimeError("interrupted")
        return original(params, task, env_config, config, seed, iteration, executor=executor)

    monkeypatch.setattr(ppo, "collect_rollouts", interrupted)
    with pytest.raises(RuntimeError, match="interrupted"):
        train(run, output_dir=str(tmp_path / "resumed"))
    monkeypatch.undo()

    resumed = train(run, output_dir=str(tmp_path / "resumed"), resume=True)
    assert _without_wall_time(resumed.stats[3]) == _without_wall_time(reference.stats[3])
    for name in reference.params[3].names:
        np.testing.assert_array_equal(resumed.params[3][name], reference.params[3][name])


def test_append_stats_keeps_earlier_rows(tmp_path):
    path = tmp_path / "progress.csv"
    run = RunConfig(ppo=SMALL)
    rows = train(run, output_dir=str(tmp_path / "run")).stats[3]
    write_stats(path, rows[:1])
    before = path.read_text()
    for row in rows[1:]:
        append_stats(path, row)
    assert path.read_text().startswith(before)
    assert read_stats(path) == rows


def test_append_stats_writes_the_header_once(tmp_path):
    path = tmp_path / "progress.csv"
    rows = train(RunConfig(ppo=SMALL), output_dir=str(tmp_path / "run")).stats[3]
    for row in rows:
        append_stats(path, row)
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + len(rows)
    assert lines[0].startswith("iteration,env_steps")


def test_checkpoints_are_kept_per_iteration(tmp_path):
    run = RunConfig(ppo=dataclasses.replace(SMALL, checkpoint_every=1))
    result = train(run, output_dir=str(tmp_path))
    latest = result.checkpoints[3]
    assert load_checkpoint(latest).iteration == 3
    for iteration in (1, 2, 3):
        path = snapshot_path(latest, iteration)
        assert path.endswith(f"checkpoint_seed3_it{iteration:05d}.h5")
        assert load_checkpoint(path).iteration == iteration


def test_resume_appends_to_the_truncated_progress(tmp_path, monkeypatch):
    run = RunConfig(ppo=dataclasses.replace(SMALL, checkpoint_every=2))
    original = ppo.collect_rollouts

    def interrupted(params, task, env_config, config, seed, iteration, executor=None):
        if iteration == 3:
            raise RuntimeError("interrupted")
        return original(params, task, env_config, config, seed, iteration, executor=executor)

    monkeypatch.setattr(ppo, "collect_rollouts", interrupted)
    with pytest.raises(RuntimeError, match="interrupted"):
        train(run, output_dir=str(tmp_path))
    monkeypatch.undo()
    assert [row.iteration for row in read_stats(tmp_path / "progress_seed3.csv")] == [1, 2]

    train(run, output_dir=str(tmp_path), resume=True)
    assert [row.iteration for row in read_stats(tmp_path / "progress_seed3.csv")] == [1, 2, 3]


@pytest.mark.slow
def test_point_tracking_learns(tmp_path):
    config = PpoConfig(
        rollout_len=200,
        n_envs=8,
        epochs_per_update=10,
        minibatch_size=256,
        learning_rate=3e-4,
        total_env_steps=200_000,
        seeds=(123,),
    )
    run = RunConfig(task=TaskKind.POINT_TRACKING, env=EnvConfig(), ppo=config)
    result = train(run, output_dir=str(tmp_path))
    stats = result.stats[123]
    first = np.mean([row.mean_reward for row in stats[:5]])
    last = np.mean([row.mean_reward for row in stats[-5:]])
    assert last > first
    assert np.mean([row.tracking_error for row in stats[-5:]]) < np.mean([row.tracking_error for row in stats[:5]])

    # a full episode earns at most 1 per step
    policy = MlpPolicy(result.params[123])
    report = evaluate_policy(policy, TaskKind.POINT_TRACKING, BASIC_FAMILIES, 10, env_config=run.env)
    max_return = run.env.max_episode_steps * precision_reward(0.0)
    assert np.mean([row.mean_reward for row in report.rows]) >= 0.8 * max_return
