class MobileManipulationError(Exception):
    """Base class of every error raised by this package."""


class WorkspaceTooSmallError(MobileManipulationError, ValueError):
    """The workspace cannot hold a trajectory of the requested family at its minimum size."""

    def __init__(self, family, dimension, extent, required):
        self.family = family
        self.dimension = dimension
        self.extent = extent
        self.required = required
        super().__init__(
            f"workspace extent along {dimension} ({extent:.3f} m) cannot hold a {family} trajectory "
            f"(needs at least {required:.3f} m)"
        )


class PlacementError(WorkspaceTooSmallError):
    """A trajectory family cannot pass through a forced start point inside the workspace."""

    def __init__(self, family, start):
        self.family = family
        self.start = tuple(start)
        ValueError.__init__(self, f"cannot place a {family} trajectory through {self.start} inside the workspace")


class EpisodeDoneError(MobileManipulationError, RuntimeError):
    """`step` was called on an environment whose episode already ended."""


class NonFiniteGradientError(MobileManipulationError, FloatingPointError):
    def __init__(self, block):
        self.block = block
        super().__init__(f"non-finite gradient in parameter block '{block}'")


class NonFiniteLossError(MobileManipulationError, FloatingPointError):
    def __init__(self, terms):
        self.terms = dict(terms)
        details = ", ".join(f"{key}={value!r}" for key, value in self.terms.items())
        super().__init__(f"non-finite PPO loss, update aborted ({details})")


class ConfigError(MobileManipulationError, ValueError):
    """Malformed config file, unknown key or value of the wrong type."""


class CheckpointError(MobileManipulationError, OSError):
    """Base class of checkpoint failures, also used for disk-write failures."""


class CheckpointVersionError(CheckpointError):
    pass


class CorruptCheckpointError(CheckpointError):
    pass


class ConfigHashMismatchError(CheckpointError):
    def __init__(self, checkpoint_hash, config_hash):
        self.checkpoint_hash = checkpoint_hash
        self.config_hash = config_hash
        super().__init__(
            f"checkpoint was trained with config {checkpoint_hash} but the given config hashes to {config_hash}"
        )
