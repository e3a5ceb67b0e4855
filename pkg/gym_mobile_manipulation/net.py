"""Small numpy MLPs for the Gaussian policy and the value function, with exact gradients and Adam.

Parameter blocks are named ``pi.w<k>``/``pi.b<k>`` for the policy layers, ``pi.log_std`` for the
state-independent log standard deviation and ``vf.w<k>``/``vf.b<k>`` for the value layers. Weights
are ``(fan_in, fan_out)`` so a batch of observations ``(N, input_dim)`` goes through as ``x @ w + b``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from gym_mobile_manipulation.errors import NonFiniteGradientError

LOG_STD_INIT = -0.5
LOG_STD_BOUNDS = (-5.0, 1.0)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    output_dim: int
    hidden: tuple[int, ...] = (64, 64)
    activation: str = "tanh"

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.input_dim < 1 or self.output_dim < 1 or any(h < 1 for h in self.hidden):
            raise ValueError(f"all layer widths must be >= 1, got {self}")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}, only 'tanh' is available")

    @property
    def layer_shapes(self):
        dims = (self.input_dim, *self.hidden, self.output_dim)
        return list(zip(dims[:-1], dims[1:]))


def _layer_names(prefix, spec):
    names = []
    for k in range(len(spec.layer_shapes)):
        names += [f"{prefix}.w{k}", f"{prefix}.b{k}"]
    return names


@dataclass
class PolicyParams:
    """Policy and value network parameters as named float64 arrays, in declared order."""

    policy: MlpSpec
    value: MlpSpec
    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        expected = self.block_shapes(self.policy, self.value)
        if list(self.arrays) != list(expected):
            raise ValueError(f"parameter blocks {list(self.arrays)} do not match {list(expected)}")
        for name, shape in expected.items():
            if self.arrays[name].shape != shape:
                raise ValueError(f"block {name} has shape {self.arrays[name].shape}, expected {shape}")

    @staticmethod
    def block_shapes(policy, value):
        shapes = {}
        for prefix, spec in (("pi", policy), ("vf", value)):
            for k, (fan_in, fan_out) in enumerate(spec.layer_shapes):
                shapes[f"{prefix}.w{k}"] = (fan_in, fan_out)
                shapes[f"{prefix}.b{k}"] = (fan_out,)
            if prefix == "pi":
                shapes["pi.log_std"] = (policy.output_dim,)
        return shapes

    @property
    def names(self):
        return list(self.arrays)

    def __getitem__(self, name):
        return self.arrays[name]

    def copy(self):
        return PolicyParams(self.policy, self.value, {name: a.copy() for name, a in self.arrays.items()})

    def with_arrays(self, arrays):
        return PolicyParams(self.policy, self.value, {name: arrays[name] for name in self.names})

    def clamp_log_std(self):
        out = self.copy()
        out.arrays["pi.log_std"] = np.clip(out.arrays["pi.log_std"], *LOG_STD_BOUNDS)
        return out


def _orthogonal(rng, shape, gain):
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    # sign fix makes the draw uniform over orthogonal matrices
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_params(policy, value, seed):
    """Seeded orthogonal init: gain sqrt(2) on hidden layers, 0.01 on the policy output, 1 on the value output."""
    rng = np.random.default_rng(seed)
    arrays = {}
    for prefix, spec, out_gain in (("pi", policy, 0.01), ("vf", value, 1.0)):
        n_layers = len(spec.layer_shapes)
        for k, shape in enumerate(spec.layer_shapes):
            gain = out_gain if k == n_layers - 1 else math.sqrt(2)
            arrays[f"{prefix}.w{k}"] = _orthogonal(rng, shape, gain)
            arrays[f"{prefix}.b{k}"] = np.zeros(shape[1])
        if prefix == "pi":
            arrays["pi.log_std"] = np.full(policy.output_dim, LOG_STD_INIT)
    return PolicyParams(policy, value, arrays)


def _as_batch(obs, spec):
    obs = np.asarray(obs, dtype=np.float64)
    single = obs.ndim == 1
    batch = obs[None, :] if single else obs
    if batch.ndim != 2 or batch.shape[1] != spec.input_dim:
        raise ValueError(f"expected observations with {spec.input_dim} features, got shape {obs.shape}")
    return batch, single


def _mlp_forward(params, prefix, spec, x):
    """Returns the output pre-activation and the input of every layer."""
    inputs = []
    h = x
    n_layers = len(spec.layer_shapes)
    for k in range(n_layers):
        inputs.append(h)
        z = h @ params[f"{prefix}.w{k}"] + params[f"{prefix}.b{k}"]
        h = np.tanh(z) if k < n_layers - 1 else z
    return h, inputs


def _mlp_backward(params, prefix, inputs, grad_out, grads):
    g = grad_out
    for k in reversed(range(len(inputs))):
        grads[f"{prefix}.w{k}"] = inputs[k].T @ g
        grads[f"{prefix}.b{k}"] = g.sum(axis=0)
        if k > 0:
            g = (g @ params[f"{prefix}.w{k}"].T) * (1.0 - inputs[k] ** 2)


def forward_policy(params, obs):
    """Mean action (tanh-squashed into [-1, 1]) and the log standard deviation.

    Accepts one observation or a batch; a single observation gives 1-d outputs.
    """
    batch, single = _as_batch(obs, params.policy)
    z, _ = _mlp_forward(params, "pi", params.policy, batch)
    mean = np.tanh(z)
    return (mean[0] if single else mean), params["pi.log_std"].copy()


def forward_value(params, obs):
    batch, single = _as_batch(obs, params.value)
    value, _ = _mlp_forward(params, "vf", params.value, batch)
    return float(value[0, 0]) if single else value[:, 0]


def log_prob(mean, log_std, action):
    """Diagonal Gaussian log-density summed over the last axis."""
    mean = np.asarray(mean, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    log_std = np.asarray(log_std, dtype=np.float64)
    if mean.shape != action.shape or mean.shape[-1] != log_std.shape[-1]:
        raise ValueError(f"shape mismatch: mean {mean.shape}, log_std {log_std.shape}, action {action.shape}")
    z = (action - mean) * np.exp(-log_std)
    return np.sum(-0.5 * z**2 - log_std - _HALF_LOG_2PI, axis=-1)


def entropy(log_std):
    """Entropy of the diagonal Gaussian, independent of the mean."""
    log_std = np.asarray(log_std, dtype=np.float64)
    return float(np.sum(log_std + 0.5 + _HALF_LOG_2PI))


@dataclass
class ForwardPass:
    """Recorded forward pass over a batch, ready for `backward`."""

    params: PolicyParams
    obs: np.ndarray
    mean: np.ndarray
    log_std: np.ndarray
    value: np.ndarray
    policy_inputs: list
    value_inputs: list


def forward(params, obs):
    """Policy mean, log_std and value for a batch of observations, keeping what `backward` needs."""
    batch, _ = _as_batch(obs, params.policy)
    z, policy_inputs = _mlp_forward(params, "pi", params.policy, batch)
    value, value_inputs = _mlp_forward(params, "vf", params.value, batch)
    return ForwardPass(
        params=params,
        obs=batch,
        mean=np.tanh(z),
        log_std=params["pi.log_std"],
        value=value[:, 0],
        policy_inputs=policy_inputs,
        value_inputs=value_inputs,
    )


def backward(tape, grad_mean, grad_log_std, grad_value):
    """Reverse-mode gradients of a scalar loss wrt every parameter block.

    :param tape: the `ForwardPass` the loss was computed from
    :param grad_mean: dL/dmean, shape ``(N, action_dim)``
    :param grad_log_std: dL/dlog_std, shape ``(action_dim,)``
    :param grad_value: dL/dvalue, shape ``(N,)``
    :return: dict of gradients in the parameters' declared order
    """
    params = tape.params
    grads = {}
    _mlp_backward(params, "pi", tape.policy_inputs, grad_mean * (1.0 - tape.mean**2), grads)
    grads["pi.log_std"] = np.asarray(grad_log_std, dtype=np.float64).copy()
    _mlp_backward(params, "vf", tape.value_inputs, np.asarray(grad_value, dtype=np.float64)[:, None], grads)
    return {name: grads[name] for name in params.names}


def global_norm(grads):
    return math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))


def clip_grad_norm(grads, max_norm):
    """Scale all gradients together so their global norm is at most ``max_norm``; returns the norm before clipping."""
    norm = global_norm(grads)
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        grads = {name: g * scale for name, g in grads.items()}
    return grads, norm


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    learning_rate: float = 5e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, params, learning_rate=5e-5, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            m={name: np.zeros_like(a) for name, a in params.arrays.items()},
            v={name: np.zeros_like(a) for name, a in params.arrays.items()},
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(params, grads, state):
    """One bias-corrected Adam update. Pure: returns new parameters and a new state.

    :raises NonFiniteGradientError: a gradient block holds a NaN or an infinity
    """
    for name in params.names:
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradientError(name)
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**step
    correction2 = 1.0 - b2**step
    arrays, m, v = {}, {}, {}
    for name in params.names:
        g = grads[name]
        m[name] = b1 * state.m[name] + (1.0 - b1) * g
        v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = m[name] / correction1
        v_hat = v[name] / correction2
        arrays[name] = params[name] - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = AdamState(
        m=m, v=v, step=step, learning_rate=state.learning_rate, beta1=b1, beta2=b2, eps=state.eps
    )
    return params.with_arrays(arrays), new_state
