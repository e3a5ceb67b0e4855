from gym_mobile_manipulation.envs.mobile_manipulation_env import MobileManipulationEnv, TaskKind


class DynamicGraspingEnv(MobileManipulationEnv):
    """
    ## Description

    Reach a moving object and close the gripper on it. The grasp succeeds when the gripper goes
    from open to closed with the object within `gripper_grasp_radius`; the object then follows the
    gripper and the episode terminates with a bonus of `config.r_grasp`.

    ## Action space

    `[dx, dy, dz, dbase, gripper]` in `[-1, 1]`; the gripper closes while `gripper > 0`.

    ## Arguments

    - `family (str)`: trajectory family, one of the six basic families or "random".
    - `config (EnvConfig)`: environment configuration.
    """

    def __init__(self, family=None, config=None, render_mode=None):
        super().__init__(task=TaskKind.GRASPING, family=family, config=config, render_mode=render_mode)
