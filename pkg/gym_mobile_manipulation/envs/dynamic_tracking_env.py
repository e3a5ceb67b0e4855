from gym_mobile_manipulation.envs.mobile_manipulation_env import MobileManipulationEnv, TaskKind


class DynamicTrackingEnv(MobileManipulationEnv):
    """
    ## Description

    Keep the gripper on an object moving along a random trajectory for 200 steps. The episode is
    never terminated, only truncated.

    ## Action space

    `[dx, dy, dz, dbase]` in `[-1, 1]`, see `MobileManipulationEnv`.

    ## Arguments

    - `family (str)`: trajectory family, one of the six basic families or "random".
    - `config (EnvConfig)`: environment configuration.
    """

    def __init__(self, family=None, config=None, render_mode=None):
        super().__init__(task=TaskKind.TRACKING, family=family, config=config, render_mode=render_mode)
