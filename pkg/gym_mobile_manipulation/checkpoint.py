"""Versioned HDF5 checkpoints: network parameters, Adam state, RNG state and the run config.

Layout::

    /params/<block>          parameter arrays in declared order (see ``net``)
    /adam/m/<block>          Adam first moments
    /adam/v/<block>          Adam second moments
    attrs                    format_version, config_hash, config_text, network dims, Adam scalars,
                             seed, iteration, rng_state (JSON)
"""

import json
import os
from dataclasses import dataclass

import h5py
import numpy as np
from gymnasium import logger

from gym_mobile_manipulation.errors import CheckpointError, CheckpointVersionError, CorruptCheckpointError
from gym_mobile_manipulation.net import AdamState, MlpSpec, PolicyParams

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    params: PolicyParams
    adam: AdamState
    config_hash: str
    config_text: str
    seed: int
    iteration: int
    rng_state: dict

    @property
    def checkpoint_id(self):
        return f"seed{self.seed}-it{self.iteration}-{self.config_hash[:12]}"

    def rng(self):
        """Generator restored to the state it had when the checkpoint was written."""
        rng = np.random.default_rng()
        if self.rng_state:
            rng.bit_generator.state = self.rng_state
        return rng


def save_checkpoint(path, params, adam, run_config, rng=None, seed=0, iteration=0):
    """Write a checkpoint atomically (temporary file, then rename).

    :raises CheckpointError: the file cannot be written, with the path in the message
    """
    path = os.fspath(path)
    tmp_path = f"{path}.tmp"
    try:
        with h5py.File(tmp_path, "w") as file:
            file.attrs["format_version"] = FORMAT_VERSION
            file.attrs["config_hash"] = run_config.config_hash()
            file.attrs["config_text"] = run_config.dumps()
            file.attrs["seed"] = int(seed)
            file.attrs["iteration"] = int(iteration)
            file.attrs["rng_state"] = json.dumps(rng.bit_generator.state if rng is not None else {})
            for prefix, spec in (("policy", params.policy), ("value", params.value)):
                file.attrs[f"{prefix}.input_dim"] = spec.input_dim
                file.attrs[f"{prefix}.output_dim"] = spec.output_dim
                file.attrs[f"{prefix}.hidden"] = np.asarray(spec.hidden, dtype=np.int64)
            file.attrs["adam.step"] = adam.step
            for name in ("learning_rate", "beta1", "beta2", "eps"):
                file.attrs[f"adam.{name}"] = getattr(adam, name)
            # groups list datasets alphabetically, param_names keeps the declared order
            group = file.create_group("params")
            for name in params.names:
                group.create_dataset(name, data=params[name])
            file.attrs["param_names"] = json.dumps(params.names)
            for moment in ("m", "v"):
                group = file.create_group(f"adam/{moment}")
                for name in params.names:
                    group.create_dataset(name, data=getattr(adam, moment)[name])
        os.replace(tmp_path, path)
    except OSError as error:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise CheckpointError(f"cannot write checkpoint {path}: {error}") from error
    logger.info(f"Saved checkpoint {path} (seed {seed}, iteration {iteration})")
    return path


def _spec(attrs, prefix):
    return MlpSpec(
        input_dim=int(attrs[f"{prefix}.input_dim"]),
        output_dim=int(attrs[f"{prefix}.output_dim"]),
        hidden=tuple(int(h) for h in attrs[f"{prefix}.hidden"]),
    )


def load_checkpoint(path, run_config=None):
    """Read a checkpoint written by `save_checkpoint`.

    A ``run_config`` whose hash differs from the stored one only triggers a warning here;
    `evaluation.evaluate` refuses to run in that case.

    :raises CheckpointVersionError: the file was written by another format version
    :raises CorruptCheckpointError: the file is truncated, unreadable or misses a dataset
    """
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"checkpoint {path} does not exist")
    try:
        with h5py.File(path, "r") as file:
            version = int(file.attrs["format_version"])
            if version != FORMAT_VERSION:
                raise CheckpointVersionError(
                    f"checkpoint {path} has format version {version}, this build reads version {FORMAT_VERSION}"
                )
            names = json.loads(file.attrs["param_names"])
            arrays = {name: file["params"][name][()] for name in names}
            params = PolicyParams(_spec(file.attrs, "policy"), _spec(file.attrs, "value"), arrays)
            adam = AdamState(
                m={name: file["adam/m"][name][()] for name in names},
                v={name: file["adam/v"][name][()] for name in names},
                step=int(file.attrs["adam.step"]),
                learning_rate=float(file.attrs["adam.learning_rate"]),
                beta1=float(file.attrs["adam.beta1"]),
                beta2=float(file.attrs["adam.beta2"]),
                eps=float(file.attrs["adam.eps"]),
            )
            checkpoint = Checkpoint(
                params=params,
                adam=adam,
                config_hash=str(file.attrs["config_hash"]),
                config_text=str(file.attrs["config_text"]),
                seed=int(file.attrs["seed"]),
                iteration=int(file.attrs["iteration"]),
                rng_state=json.loads(file.attrs["rng_state"]),
            )
    except CheckpointError:
        raise
    except (OSError, KeyError, ValueError) as error:
        raise CorruptCheckpointError(f"checkpoint {path} is corrupt or incomplete: {error}") from error

    if run_config is not None and run_config.config_hash() != checkpoint.config_hash:
        logger.warn(
            f"Checkpoint {path} was trained with config {checkpoint.config_hash}, "
            f"the current config hashes to {run_config.config_hash()}"
        )
    return checkpoint
