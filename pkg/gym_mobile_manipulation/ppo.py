"""PPO with GAE over task-conditioned environments, one trajectory family per env in round-robin."""

import csv
import math
import os
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from gymnasium import logger
from tqdm import tqdm

from gym_mobile_manipulation.checkpoint import load_checkpoint, save_checkpoint
from gym_mobile_manipulation.envs import (
    DynamicGraspingEnv,
    DynamicTrackingEnv,
    PointTrackingEnv,
    TaskKind,
)
from gym_mobile_manipulation.errors import ConfigHashMismatchError, NonFiniteLossError
from gym_mobile_manipulation.net import (
    AdamState,
    MlpSpec,
    adam_step,
    backward,
    clip_grad_norm,
    entropy,
    forward,
    forward_policy,
    forward_value,
    init_params,
    log_prob,
)
from gym_mobile_manipulation.trajectories import SEED_SPACE

_ENV_CLASSES = {
    TaskKind.TRACKING: DynamicTrackingEnv,
    TaskKind.GRASPING: DynamicGraspingEnv,
    TaskKind.POINT_TRACKING: PointTrackingEnv,
}


def make_env(task, family=None, config=None):
    return _ENV_CLASSES[TaskKind(task)](family=family, config=config)


@dataclass(frozen=True)
class PpoConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    learning_rate: float = 5e-5
    rollout_len: int = 200
    n_envs: int = 30
    epochs_per_update: int = 10
    minibatch_size: int = 256
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    grad_clip_norm: float = 0.5
    total_env_steps: int = 6_000_000
    seeds: tuple[int, ...] = (123, 456, 789)
    hidden: tuple[int, ...] = (64, 64)
    n_workers: int = 1
    checkpoint_every: int = 50

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not (0 < self.gamma <= 1 and 0 < self.gae_lambda <= 1):
            raise ValueError(f"gamma and gae_lambda must lie in (0, 1], got {self.gamma} and {self.gae_lambda}")
        if self.clip_eps <= 0:
            raise ValueError(f"clip_eps must be positive, got {self.clip_eps}")
        for name in ("rollout_len", "n_envs", "epochs_per_update", "minibatch_size", "n_workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.seeds:
            raise ValueError("at least one training seed is required")

    @property
    def steps_per_iteration(self):
        return self.n_envs * self.rollout_len

    @property
    def n_iterations(self):
        return max(1, self.total_env_steps // self.steps_per_iteration)


@dataclass
class RolloutBatch:
    """One iteration of experience; step arrays are ``(n_envs, rollout_len, ...)``."""

    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    task_ids: np.ndarray
    distances: np.ndarray
    bootstrap: np.ndarray
    episode_returns: np.ndarray
    episode_successes: np.ndarray

    @property
    def n_transitions(self):
        return int(self.rewards.size)


@dataclass
class TrainStats:
    iteration: int
    env_steps: int
    mean_reward: float
    tracking_error: float
    grasp_success_rate: float
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    wall_time_s: float

    @classmethod
    def csv_header(cls):
        return [f.name for f in fields(cls)]

    def as_row(self):
        return [repr(v) for v in asdict(self).values()]


@dataclass
class _Segment:
    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    task_ids: np.ndarray
    distances: np.ndarray
    bootstrap: float
    episode_returns: list
    episode_successes: list


def _collect_segment(params, task, family, env_config, rollout_len, seed, iteration, env_index):
    rng = np.random.default_rng(np.random.SeedSequence((seed, iteration, env_index)))
    env = make_env(task, family, env_config)
    observation, info = env.reset(seed=int(rng.integers(SEED_SPACE)))
    action_dim = env.action_space.shape[0]

    out = {
        "observations": np.empty((rollout_len, observation.shape[0])),
        "actions": np.empty((rollout_len, action_dim)),
        "log_probs": np.empty(rollout_len),
        "rewards": np.empty(rollout_len),
        "values": np.empty(rollout_len),
        "dones": np.zeros(rollout_len, dtype=bool),
        "task_ids": np.empty(rollout_len, dtype=np.int64),
        "distances": np.empty(rollout_len),
    }
    episode_returns, episode_successes = [], []
    episode_return = 0.0
    done = False
    for t in range(rollout_len):
        mean, log_std = forward_policy(params, observation)
        # log-probability of the raw sample, the env gets it clipped to [-1, 1]
        action = mean + np.exp(log_std) * rng.standard_normal(action_dim)
        out["observations"][t] = observation
        out["actions"][t] = action
        out["log_probs"][t] = log_prob(mean, log_std, action)
        out["values"][t] = forward_value(params, observation)
        out["task_ids"][t] = info["task_id"]

        observation, reward, terminated, truncated, info = env.step(np.clip(action, -1.0, 1.0))
        done = terminated or truncated
        out["rewards"][t] = reward
        out["dones"][t] = done
        out["distances"][t] = info["distance"]
        episode_return += reward
        if done:
            episode_returns.append(episode_return)
            episode_successes.append(bool(info["grasp_success"]))
            episode_return = 0.0
            observation, info = env.reset(seed=int(rng.integers(SEED_SPACE)))

    bootstrap = 0.0 if done else forward_value(params, observation)
    env.close()
    return _Segment(bootstrap=bootstrap, episode_returns=episode_returns, episode_successes=episode_successes, **out)


def collect_rollouts(params, task, env_config, config, seed, iteration, executor=None):
    """Run ``config.n_envs`` env segments of ``config.rollout_len`` steps with a fixed policy snapshot.

    Env ``i`` tracks ``env_config.families[i % len(families)]``; its randomness comes from
    ``SeedSequence((seed, iteration, i))``, so the batch does not depend on the executor.
    """
    families = env_config.families
    jobs = [
        (params, task, families[i % len(families)], env_config, config.rollout_len, seed, iteration, i)
        for i in range(config.n_envs)
    ]
    if executor is None:
        segments = [_collect_segment(*job) for job in jobs]
    else:
        segments = list(executor.map(_collect_segment, *zip(*jobs)))

    def stack(name):
        return np.stack([getattr(segment, name) for segment in segments])

    return RolloutBatch(
        observations=stack("observations"),
        actions=stack("actions"),
        log_probs=stack("log_probs"),
        rewards=stack("rewards"),
        values=stack("values"),
        dones=stack("dones"),
        task_ids=stack("task_ids"),
        distances=stack("distances"),
        bootstrap=np.array([segment.bootstrap for segment in segments]),
        episode_returns=np.array([r for segment in segments for r in segment.episode_returns]),
        episode_successes=np.array([s for segment in segments for s in segment.episode_successes], dtype=bool),
    )


def compute_gae(rewards, values, dones, bootstrap, gamma, gae_lambda):
    """GAE-lambda advantages and returns along the last axis.

    ``dones[t]`` cuts both the bootstrap and the advantage recursion after step ``t``;
    ``bootstrap`` is the value of the observation following the last step.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    not_done = 1.0 - np.asarray(dones, dtype=np.float64)
    advantages = np.zeros_like(rewards)
    next_value = np.asarray(bootstrap, dtype=np.float64)
    running = np.zeros_like(next_value)
    for t in reversed(range(rewards.shape[-1])):
        delta = rewards[..., t] + gamma * next_value * not_done[..., t] - values[..., t]
        running = delta + gamma * gae_lambda * not_done[..., t] * running
        advantages[..., t] = running
        next_value = values[..., t]
    return advantages, advantages + values


def clipped_surrogate(ratio, advantages, clip_eps):
    """Per-sample ``min(r * A, clip(r, 1 - eps, 1 + eps) * A)``."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantages = np.asarray(advantages, dtype=np.float64)
    return np.minimum(ratio * advantages, np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages)


def standardize(advantages):
    """Zero mean and unit standard deviation; constant or single-sample batches are only centred."""
    advantages = np.asarray(advantages, dtype=np.float64)
    centred = advantages - advantages.mean()
    std = centred.std()
    return centred / std if std > 1e-12 else centred


@dataclass
class LossInfo:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float


def ppo_loss(params, observations, actions, old_log_probs, advantages, returns, config):
    """Clipped-surrogate loss and its exact gradient wrt every parameter block.

    loss = -mean(clipped surrogate) + value_coef * mean((V - R)^2) - entropy_coef * entropy
    """
    tape = forward(params, observations)
    n = len(advantages)
    std = np.exp(tape.log_std)
    logp = log_prob(tape.mean, tape.log_std, actions)
    ratio = np.exp(logp - old_log_probs)
    unclipped = ratio * advantages
    surrogate = clipped_surrogate(ratio, advantages, config.clip_eps)
    policy_loss = -float(np.mean(surrogate))
    value_error = tape.value - returns
    value_loss = float(np.mean(value_error**2))
    ent = entropy(tape.log_std)
    loss = policy_loss + config.value_coef * value_loss - config.entropy_coef * ent

    # the clipped branch is flat in the ratio wherever it is the minimum
    d_ratio = np.where(unclipped <= surrogate, -advantages, 0.0) / n
    d_logp = d_ratio * ratio
    residual = (actions - tape.mean) / std**2
    grad_mean = d_logp[:, None] * residual
    grad_log_std = np.sum(d_logp[:, None] * ((actions - tape.mean) * residual - 1.0), axis=0)
    grad_log_std = grad_log_std - config.entropy_coef
    grad_value = 2.0 * config.value_coef * value_error / n
    grads = backward(tape, grad_mean, grad_log_std, grad_value)

    info = LossInfo(
        loss=float(loss),
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=ent,
        approx_kl=float(np.mean(old_log_probs - logp)),
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > config.clip_eps)),
    )
    return loss, grads, info


def ppo_update(params, adam, batch, config, rng, iteration=0):
    """Several epochs of minibatch Adam steps on the clipped-surrogate loss.

    :return: new parameters, new Adam state and the mean ``LossInfo`` over all minibatches
    :raises NonFiniteLossError: a minibatch loss is NaN or infinite
    """
    advantages, returns = compute_gae(
        batch.rewards, batch.values, batch.dones, batch.bootstrap, config.gamma, config.gae_lambda
    )
    n = batch.n_transitions
    observations = batch.observations.reshape(n, -1)
    actions = batch.actions.reshape(n, -1)
    old_log_probs = batch.log_probs.reshape(n)
    advantages = standardize(advantages.reshape(n))
    returns = returns.reshape(n)

    infos = []
    for _ in range(config.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            idx = order[start : start + config.minibatch_size]
            loss, grads, info = ppo_loss(
                params, observations[idx], actions[idx], old_log_probs[idx], advantages[idx], returns[idx], config
            )
            if not math.isfinite(loss):
                raise NonFiniteLossError({**asdict(info), "iteration": iteration})
            grads, _ = clip_grad_norm(grads, config.grad_clip_norm)
            params, adam = adam_step(params, grads, adam)
            params = params.clamp_log_std()
            infos.append(info)

    mean_info = LossInfo(**{f.name: float(np.mean([getattr(i, f.name) for i in infos])) for f in fields(LossInfo)})
    return params, adam, mean_info


def _iteration_stats(iteration, env_steps, batch, info, wall_time):
    returns = batch.episode_returns
    successes = batch.episode_successes
    return TrainStats(
        iteration=iteration,
        env_steps=env_steps,
        mean_reward=float(np.mean(returns)) if returns.size else float(np.sum(batch.rewards) / batch.rewards.shape[0]),
        tracking_error=float(np.mean(batch.distances)),
        grasp_success_rate=float(np.mean(successes)) if successes.size else 0.0,
        policy_loss=info.policy_loss,
        value_loss=info.value_loss,
        entropy=info.entropy,
        approx_kl=info.approx_kl,
        clip_fraction=info.clip_fraction,
        wall_time_s=wall_time,
    )


def write_stats(path, stats):
    with open(path, "w", newline="") as file:
        writer = csv.writer(file)
        writer.writerow(TrainStats.csv_header())
        for row in stats:
            writer.writerow(row.as_row())


def append_stats(path, row):
    """Append one row to a stats CSV, writing the header first if the file is new or empty."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as file:
        writer = csv.writer(file)
        if fresh:
            writer.writerow(TrainStats.csv_header())
        writer.writerow(row.as_row())


def snapshot_path(checkpoint_path, iteration):
    """Path of the copy of ``checkpoint_path`` kept for ``iteration``."""
    root, ext = os.path.splitext(checkpoint_path)
    return f"{root}_it{iteration:05d}{ext}"


def read_stats(path):
    with open(path, newline="") as file:
        return [
            TrainStats(**{k: int(v) if k in ("iteration", "env_steps") else float(v) for k, v in row.items()})
            for row in csv.DictReader(file)
        ]


def average_stats(per_seed):
    """Iteration-wise mean of several seeds' stats (truncated to the shortest run)."""
    length = min(len(stats) for stats in per_seed)
    averaged = []
    for k in range(length):
        rows = [stats[k] for stats in per_seed]
        values = {
            f.name: float(np.mean([getattr(row, f.name) for row in rows]))
            for f in fields(TrainStats)
            if f.name not in ("iteration", "env_steps")
        }
        averaged.append(TrainStats(iteration=rows[0].iteration, env_steps=rows[0].env_steps, **values))
    return averaged


@dataclass
class TrainResult:
    params: dict
    stats: dict
    mean_stats: list
    checkpoints: dict


def _train_seed(run_config, seed, output_dir, executor, progress, resume=False):
    task = TaskKind(run_config.task)
    env_config = run_config.env
    config = run_config.ppo

    sample_env = make_env(task, env_config.families[0], env_config)
    obs_dim = sample_env.observation_space.shape[0]
    action_dim = sample_env.action_space.shape[0]
    sample_env.close()

    stats_path = os.path.join(output_dir, f"progress_seed{seed}.csv")
    checkpoint_path = os.path.join(output_dir, f"checkpoint_seed{seed}.h5")
    if resume and os.path.exists(checkpoint_path):
        checkpoint = load_checkpoint(checkpoint_path)
        if checkpoint.config_hash != run_config.config_hash():
            raise ConfigHashMismatchError(checkpoint.config_hash, run_config.config_hash())
        params, adam, rng = checkpoint.params, checkpoint.adam, checkpoint.rng()
        stats = read_stats(stats_path)[: checkpoint.iteration] if os.path.exists(stats_path) else []
        first = checkpoint.iteration + 1
        logger.info(f"Resuming seed {seed} from {checkpoint_path} after iteration {checkpoint.iteration}")
    else:
        params = init_params(MlpSpec(obs_dim, action_dim, config.hidden), MlpSpec(obs_dim, 1, config.hidden), seed)
        adam = AdamState.zeros(params, learning_rate=config.learning_rate)
        rng = np.random.default_rng(seed)
        stats = []
        first = 1
    # the CSV on disk holds exactly the rows of the iterations already done
    write_stats(stats_path, stats)

    started = time.perf_counter()
    bar = tqdm(range(first, config.n_iterations + 1), desc=f"seed {seed}", disable=not progress)
    for iteration in bar:
        batch = collect_rollouts(params, task, env_config, config, seed, iteration, executor=executor)
        params, adam, info = ppo_update(params, adam, batch, config, rng, iteration=iteration)
        row = _iteration_stats(
            iteration, iteration * config.steps_per_iteration, batch, info, time.perf_counter() - started
        )
        stats.append(row)
        append_stats(stats_path, row)
        logger.info(
            f"seed {seed} iteration {iteration}: steps={row.env_steps} reward={row.mean_reward:.3f} "
            f"error={row.tracking_error:.3f} success={row.grasp_success_rate:.2f} "
            f"policy_loss={row.policy_loss:.4f} value_loss={row.value_loss:.4f}"
        )
        bar.set_postfix(reward=f"{row.mean_reward:.2f}", error=f"{row.tracking_error:.3f}")
        last = iteration == config.n_iterations
        if last or (config.checkpoint_every > 0 and iteration % config.checkpoint_every == 0):
            save_checkpoint(checkpoint_path, params, adam, run_config, rng=rng, seed=seed, iteration=iteration)
            shutil.copyfile(checkpoint_path, snapshot_path(checkpoint_path, iteration))
    return params, stats, checkpoint_path


def train(run_config, output_dir=None, progress=False, resume=False):
    """Train one policy per seed in ``run_config.ppo.seeds`` and average their stats.

    With ``resume`` a seed whose checkpoint already exists in ``output_dir`` continues after the
    checkpointed iteration; rollouts are keyed by iteration, so the result matches an uninterrupted run.

    Writes ``progress_seed<seed>.csv`` (one row appended per iteration), ``checkpoint_seed<seed>.h5``
    (the latest checkpoint), ``checkpoint_seed<seed>_it<iteration>.h5`` (one per saved checkpoint)
    and ``progress_mean.csv`` to ``output_dir`` (defaults to ``run_config.output_dir``).
    """
    output_dir = output_dir or run_config.output_dir
    os.makedirs(output_dir, exist_ok=True)
    config = run_config.ppo

    executor = ProcessPoolExecutor(max_workers=config.n_workers) if config.n_workers > 1 else None
    result = TrainResult(params={}, stats={}, mean_stats=[], checkpoints={})
    try:
        for seed in config.seeds:
            params, stats, path = _train_seed(run_config, seed, output_dir, executor, progress, resume)
            result.params[seed] = params
            result.stats[seed] = stats
            result.checkpoints[seed] = path
    finally:
        if executor is not None:
            executor.shutdown()

    result.mean_stats = average_stats(list(result.stats.values()))
    write_stats(os.path.join(output_dir, "progress_mean.csv"), result.mean_stats)
    return result
