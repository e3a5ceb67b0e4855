from gymnasium.envs.registration import register

__version__ = "0.1.0"

register(
    id="DynamicTracking-v0",
    entry_point="gym_mobile_manipulation.envs:DynamicTrackingEnv",
    max_episode_steps=200,
)

register(
    id="DynamicGrasping-v0",
    entry_point="gym_mobile_manipulation.envs:DynamicGraspingEnv",
    max_episode_steps=200,
)

register(
    id="PointTracking-v0",
    entry_point="gym_mobile_manipulation.envs:PointTrackingEnv",
    max_episode_steps=200,
)
