import math

import numpy as np
import pytest

from gym_mobile_manipulation.errors import NonFiniteGradientError
from gym_mobile_manipulation.net import (
    AdamState,
    MlpSpec,
    PolicyParams,
    adam_step,
    clip_grad_norm,
    entropy,
    forward,
    forward_policy,
    forward_value,
    global_norm,
    init_params,
    log_prob,
)
from gym_mobile_manipulation.ppo import PpoConfig
from gym_mobile_manipulation.selftest import gradient_error, random_loss_problem

POLICY = MlpSpec(23, 4)
VALUE = MlpSpec(23, 1)


def test_block_names_follow_declared_order():
    params = init_params(POLICY, VALUE, seed=0)
    assert params.names == ["pi.w0", "pi.b0", "pi.w1", "pi.b1", "pi.w2", "pi.b2", "pi.log_std"] + [
        "vf.w0",
        "vf.b0",
        "vf.w1",
        "vf.b1",
        "vf.w2",
        "vf.b2",
    ]
    assert params["pi.w0"].shape == (23, 64)
    assert params["vf.w2"].shape == (64, 1)


def test_init_is_seeded_and_orthogonal():
    a = init_params(POLICY, VALUE, seed=5)
    b = init_params(POLICY, VALUE, seed=5)
    for name in a.names:
        np.testing.assert_array_equal(a[name], b[name])
    w = a["pi.w1"]
    np.testing.assert_allclose(w.T @ w, 2.0 * np.eye(64), atol=1e-10)
    np.testing.assert_array_equal(a["pi.log_std"], np.full(4, -0.5))


def test_wrong_block_shapes_are_rejected():
    params = init_params(POLICY, VALUE, seed=0)
    arrays = dict(params.arrays)
    arrays["pi.b0"] = np.zeros(3)
    with pytest.raises(ValueError):
        PolicyParams(POLICY, VALUE, arrays)


def test_zero_weights_give_zero_outputs():
    params = init_params(POLICY, VALUE, seed=0)
    zeros = params.with_arrays({name: np.zeros_like(a) for name, a in params.arrays.items()})
    mean, log_std = forward_policy(zeros, np.ones(23))
    np.testing.assert_array_equal(mean, np.zeros(4))
    np.testing.assert_array_equal(log_std, np.zeros(4))
    assert forward_value(zeros, np.ones(23)) == 0.0


def test_mean_action_is_bounded():
    params = init_params(POLICY, VALUE, seed=0)
    big = params.with_arrays({name: a * 100.0 for name, a in params.arrays.items()})
    mean, _ = forward_policy(big, np.random.default_rng(0).normal(size=(50, 23)) * 10)
    assert mean.shape == (50, 4)
    assert np.all(np.abs(mean) <= 1.0)


def test_batch_and_single_forward_agree():
    params = init_params(POLICY, VALUE, seed=1)
    obs = np.random.default_rng(1).normal(size=(3, 23))
    tape = forward(params, obs)
    for k in range(3):
        mean, _ = forward_policy(params, obs[k])
        np.testing.assert_allclose(tape.mean[k], mean, atol=1e-12)
        assert tape.value[k] == pytest.approx(forward_value(params, obs[k]), abs=1e-12)


def test_observation_width_is_checked():
    params = init_params(POLICY, VALUE, seed=0)
    with pytest.raises(ValueError):
        forward_policy(params, np.zeros(22))


def test_standard_normal_log_prob():
    assert log_prob(np.zeros(1), np.zeros(1), np.zeros(1)) == pytest.approx(-0.918939, abs=1e-6)
    assert log_prob(np.zeros(2), np.zeros(2), np.ones(2)) == pytest.approx(2 * (-0.918939 - 0.5), abs=1e-6)


def test_entropy_of_unit_gaussian():
    assert entropy(np.zeros(3)) == pytest.approx(3 * (0.5 + 0.5 * math.log(2 * math.pi)))


@pytest.mark.parametrize("hidden", [(), (8, 8), (64, 64)])
def test_loss_gradients_match_finite_differences(hidden):
    rng = np.random.default_rng(0)
    for entropy_coef in (0.0, 0.01):
        params, batch = random_loss_problem(rng, hidden=hidden)
        assert len(params.policy.layer_shapes) == len(hidden) + 1
        assert gradient_error(params, batch, PpoConfig(entropy_coef=entropy_coef)) <= 1e-5


def test_clip_grad_norm():
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    clipped, norm = clip_grad_norm(grads, 0.5)
    assert norm == 5.0
    assert global_norm(clipped) == pytest.approx(0.5)
    unchanged, _ = clip_grad_norm(grads, 10.0)
    np.testing.assert_array_equal(unchanged["a"], grads["a"])


def test_adam_zero_gradient_keeps_parameters():
    params = init_params(MlpSpec(3, 2, (4,)), MlpSpec(3, 1, (4,)), seed=0)
    state = AdamState.zeros(params, learning_rate=1e-3)
    grads = {name: np.zeros_like(a) for name, a in params.arrays.items()}
    new_params, new_state = adam_step(params, grads, state)
    for name in params.names:
        np.testing.assert_array_equal(new_params[name], params[name])
    assert new_state.step == 1


def test_adam_first_step_moves_by_the_learning_rate():
    params = init_params(MlpSpec(3, 2, (4,)), MlpSpec(3, 1, (4,)), seed=0)
    state = AdamState.zeros(params, learning_rate=1e-3)
    rng = np.random.default_rng(0)
    grads = {name: rng.choice([-2.0, 0.5, 3.0], size=a.shape) for name, a in params.arrays.items()}
    new_params, _ = adam_step(params, grads, state)
    for name in params.names:
        np.testing.assert_allclose(new_params[name] - params[name], -1e-3 * np.sign(grads[name]), rtol=1e-6)
    # the input state is left untouched
    assert state.step == 0
    assert all(np.all(m == 0) for m in state.m.values())


def test_adam_rejects_non_finite_gradients():
    params = init_params(MlpSpec(3, 2, (4,)), MlpSpec(3, 1, (4,)), seed=0)
    grads = {name: np.zeros_like(a) for name, a in params.arrays.items()}
    grads["vf.b1"] = np.array([np.nan])
    with pytest.raises(NonFiniteGradientError) as error:
        adam_step(params, grads, AdamState.zeros(params))
    assert error.value.block == "vf.b1"


def test_log_std_is_clamped():
    params = init_params(MlpSpec(3, 2, (4,)), MlpSpec(3, 1, (4,)), seed=0)
    arrays = dict(params.arrays)
    arrays["pi.log_std"] = np.array([-9.0, 3.0])
    np.testing.assert_array_equal(params.with_arrays(arrays).clamp_log_std()["pi.log_std"], [-5.0, 1.0])
