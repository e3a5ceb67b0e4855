"""Numerical oracle suites: gradients, GAE, clip arithmetic, reward, FK/IK and trajectory speed."""

import math
from dataclasses import dataclass

import numpy as np
from gymnasium import logger

from gym_mobile_manipulation.envs.mobile_manipulation_env import precision_reward
from gym_mobile_manipulation.net import MlpSpec, init_params
from gym_mobile_manipulation.ppo import PpoConfig, clipped_surrogate, compute_gae, ppo_loss
from gym_mobile_manipulation.simulated_robot import RobotParams, Unreachable, fk, ik
from gym_mobile_manipulation.trajectories import BASIC_FAMILIES, DT, TrajectoryFamily, positions, sample_spec


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def gae_brute_force(rewards, values, dones, bootstrap, gamma, gae_lambda):
    """Advantages as explicit (gamma * lambda)-weighted sums of one-step TD errors, O(T^2)."""
    n = len(rewards)
    next_values = np.append(values[1:], bootstrap)
    deltas = [rewards[t] + gamma * next_values[t] * (1.0 - dones[t]) - values[t] for t in range(n)]
    advantages = np.zeros(n)
    for t in range(n):
        total, weight = 0.0, 1.0
        for k in range(t, n):
            total += weight * deltas[k]
            if dones[k]:
                break
            weight *= gamma * gae_lambda
        advantages[t] = total
    return advantages


def random_loss_problem(rng, obs_dim=5, action_dim=3, batch=4, hidden=(8, 8)):
    """Random parameters and a small batch for gradient checks of the PPO loss."""
    params = init_params(MlpSpec(obs_dim, action_dim, hidden), MlpSpec(obs_dim, 1, hidden), int(rng.integers(1 << 31)))
    params = params.with_arrays({name: a + rng.normal(0.0, 0.3, a.shape) for name, a in params.arrays.items()})
    observations = rng.normal(size=(batch, obs_dim))
    actions = rng.uniform(-1.0, 1.0, size=(batch, action_dim))
    old_log_probs = rng.normal(-2.0, 1.0, size=batch)
    advantages = rng.normal(size=batch)
    returns = rng.normal(size=batch)
    return params, (observations, actions, old_log_probs, advantages, returns)


def gradient_error(params, batch, config, h=1e-5):
    """Largest per-block relative error between analytic and central-difference gradients."""
    _, grads, _ = ppo_loss(params, *batch, config)
    worst = 0.0
    for name in params.names:
        numeric = np.zeros_like(params[name])
        for index in np.ndindex(params[name].shape):
            shifted = []
            for sign in (1.0, -1.0):
                arrays = {k: v.copy() for k, v in params.arrays.items()}
                arrays[name][index] += sign * h
                shifted.append(ppo_loss(params.with_arrays(arrays), *batch, config)[0])
            numeric[index] = (shifted[0] - shifted[1]) / (2 * h)
        scale = np.linalg.norm(grads[name]) + np.linalg.norm(numeric)
        if scale > 0:
            worst = max(worst, float(np.linalg.norm(grads[name] - numeric) / scale))
    return worst


def check_gradients(rng, trials=3):
    config = PpoConfig(entropy_coef=0.01)
    worst = max(gradient_error(*random_loss_problem(rng), config) for _ in range(trials))
    return CheckResult("ppo loss gradients", worst <= 1e-5, f"max relative error {worst:.2e}")


def check_gae(rng, trials=500):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 51))
        rewards, values = rng.normal(size=n), rng.normal(size=n)
        dones = rng.random(n) < 0.1
        bootstrap = float(rng.normal())
        gamma, gae_lambda = rng.uniform(0.5, 1.0), rng.uniform(0.0, 1.0)
        advantages, _ = compute_gae(rewards, values, dones, bootstrap, gamma, gae_lambda)
        expected = gae_brute_force(rewards, values, dones, bootstrap, gamma, gae_lambda)
        worst = max(worst, float(np.max(np.abs(advantages - expected))))
    return CheckResult("gae oracle", worst <= 1e-10, f"max abs error {worst:.2e} over {trials} sequences")


def check_clip_arithmetic():
    value = float(np.mean(clipped_surrogate([0.7, 1.0, 1.4], [-1.0, 2.0, 1.0], 0.2)))
    return CheckResult("clip arithmetic", abs(value - 0.8) <= 1e-12, f"surrogate mean {value!r}")


def check_reward():
    grid = np.linspace(0.0, 2.0, 10_000)
    rewards = precision_reward(grid)
    ok = (
        precision_reward(0.0) == 1.0
        and abs(precision_reward(0.1) - (-0.1 + math.exp(-1.0))) <= 1e-12
        and bool(np.all(np.diff(rewards) < 0))
    )
    return CheckResult("precision reward", ok, f"r(0)={precision_reward(0.0)!r}, r(0.1)={precision_reward(0.1)!r}")


def check_kinematics(rng, samples=10_000):
    params = RobotParams()
    worst = 0.0
    checked = 0
    while checked < samples:
        q = rng.uniform(params.joint_limits[:, 0], params.joint_limits[:, 1])
        base_x = rng.uniform(*params.base_limits)
        target = fk(q, base_x, params)
        solution = ik(target, base_x, params)
        if isinstance(solution, Unreachable):
            # outside the reach shell
            continue
        worst = max(worst, float(np.linalg.norm(fk(solution, base_x, params) - target)))
        checked += 1
    far = ik(np.array([params.link1_length + params.link2_length + 0.6, 0.0, params.shoulder_height]), 0.0, params)
    clamped = isinstance(far, Unreachable) and abs(np.linalg.norm(far.clamped - [0, 0, 0.5]) - params.reach_max) < 1e-9
    return CheckResult("fk/ik round trip", worst <= 1e-9 and clamped, f"max error {worst:.2e} m")


def check_trajectory_speed(rng, specs_per_family=100):
    worst, exact_worst = 0.0, 0.0
    for family in BASIC_FAMILIES:
        for _ in range(specs_per_family):
            spec = sample_spec(family, int(rng.integers(1 << 62)))
            steps = np.linalg.norm(np.diff(positions(spec), axis=0), axis=1) - spec.speed * DT
            worst = max(worst, float(np.max(steps)))
            # closed paths never touch the bounds, so every step is exact
            if family in (TrajectoryFamily.CIRCLE, TrajectoryFamily.SQUARE):
                exact_worst = max(exact_worst, float(np.max(np.abs(steps))))
    passed = worst <= 1e-6 and exact_worst <= 1e-6
    detail = f"max overshoot {worst:.2e} m, max circle/square deviation {exact_worst:.2e} m"
    return CheckResult("trajectory speed bound", passed, detail)


def run_selftest(seed=0):
    rng = np.random.default_rng(seed)
    results = [
        check_gradients(rng),
        check_gae(rng),
        check_clip_arithmetic(),
        check_reward(),
        check_kinematics(rng),
        check_trajectory_speed(rng),
    ]
    for result in results:
        log = logger.info if result.passed else logger.error
        log(f"{result.name}: {'ok' if result.passed else 'FAILED'} ({result.detail})")
    return results
