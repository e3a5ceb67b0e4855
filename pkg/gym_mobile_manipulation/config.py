"""Run configuration and its flat plain-text format.

One setting per line, ``section.key = value``; ``#`` starts a comment and blank lines are skipped.
Tuples are comma-separated, booleans ``true``/``false`` and enums their value string. Every key has
a default, so a config file only lists what it changes::

    run.task = grasping
    env.families = circle, helix
    noise.sigma_obs = 0.0
    ppo.seeds = 123, 456
"""

import dataclasses
import enum
import hashlib
import os
import typing
from dataclasses import dataclass, field

from gym_mobile_manipulation.envs import EnvConfig, TaskKind
from gym_mobile_manipulation.errors import ConfigError
from gym_mobile_manipulation.ppo import PpoConfig

OUTPUT_DIR_ENV = "MOBILE_MANIP_OUTPUT_DIR"


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV, "runs")


@dataclass(frozen=True)
class RunConfig:
    task: TaskKind = TaskKind.TRACKING
    output_dir: str = field(default_factory=default_output_dir)
    env: EnvConfig = EnvConfig()
    ppo: PpoConfig = PpoConfig()

    def __post_init__(self):
        object.__setattr__(self, "task", TaskKind(self.task))

    @classmethod
    def loads(cls, text):
        """Parse a config text on top of the defaults.

        :raises ConfigError: malformed line, unknown key or bad value, with the line number
        """
        overrides = {section: {} for section in _SECTIONS}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {number}: expected 'section.key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            section, _, name = key.partition(".")
            if section not in _SECTIONS or name not in _section_fields(section):
                raise ConfigError(f"line {number}: unknown key {key!r}")
            try:
                overrides[section][name] = _parse_value(value, _section_fields(section)[name].type)
            except ValueError as error:
                raise ConfigError(f"line {number}: bad value {value!r} for {key}: {error}") from None
        try:
            return _build(overrides)
        except ValueError as error:
            raise ConfigError(f"invalid configuration: {error}") from None

    @classmethod
    def from_file(cls, path):
        with open(path) as file:
            return cls.loads(file.read())

    def dumps(self, include_output_dir=True):
        """Canonical text: every key of every section in declaration order."""
        lines = []
        for section in _SECTIONS:
            target = _section_target(self, section)
            for name in _section_fields(section):
                if section == "run" and name == "output_dir" and not include_output_dir:
                    continue
                lines.append(f"{section}.{name} = {_format_value(getattr(target, name))}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w") as file:
            file.write(self.dumps())

    def config_hash(self):
        """SHA-256 of the canonical dump without ``run.output_dir``."""
        return hashlib.sha256(self.dumps(include_output_dir=False).encode()).hexdigest()

    def with_seeds(self, seeds):
        return dataclasses.replace(self, ppo=dataclasses.replace(self.ppo, seeds=tuple(seeds)))


# section -> attribute path from RunConfig
_SECTIONS = {
    "run": (),
    "env": ("env",),
    "workspace": ("env", "workspace"),
    "traj": ("env", "trajectory_ranges"),
    "robot": ("env", "robot"),
    "dynamics": ("env", "dynamics"),
    "noise": ("env", "noise"),
    "ppo": ("ppo",),
}


def _section_target(config, section):
    target = config
    for attribute in _SECTIONS[section]:
        target = getattr(target, attribute)
    return target


def _section_fields(section):
    cls = type(_section_target(_DEFAULTS, section))
    # nested dataclasses get their own section
    return {f.name: f for f in dataclasses.fields(cls) if not dataclasses.is_dataclass(f.type)}


def _build(overrides):
    def rebuild(instance, path):
        changes = {}
        for f in dataclasses.fields(instance):
            if dataclasses.is_dataclass(f.type):
                changes[f.name] = rebuild(getattr(instance, f.name), path + (f.name,))
        section = next(name for name, section_path in _SECTIONS.items() if section_path == path)
        changes.update(overrides[section])
        return dataclasses.replace(instance, **changes)

    return rebuild(RunConfig(), ())


def _parse_scalar(text, kind):
    if kind is bool:
        if text.lower() not in ("true", "false"):
            raise ValueError("expected true or false")
        return text.lower() == "true"
    if isinstance(kind, type) and issubclass(kind, enum.Enum):
        return kind(text)
    if kind in (int, float, str):
        return kind(text)
    raise ValueError(f"unsupported type {kind}")


def _parse_value(text, kind):
    if typing.get_origin(kind) is tuple:
        args = typing.get_args(kind)
        items = [item.strip() for item in text.split(",") if item.strip()]
        if Ellipsis not in args and len(items) != len(args):
            raise ValueError(f"expected {len(args)} comma-separated values, got {len(items)}")
        return tuple(_parse_scalar(item, args[0]) for item in items)
    return _parse_scalar(text, kind)


def _format_scalar(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _format_value(value):
    if isinstance(value, tuple):
        return ", ".join(_format_scalar(v) for v in value)
    return _format_scalar(value)


_DEFAULTS = RunConfig(output_dir="")
