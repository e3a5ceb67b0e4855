import dataclasses

import numpy as np
import pytest

from gym_mobile_manipulation.simulated_robot import (
    DynamicsParams,
    DynamicsRanges,
    RobotParams,
    SimulatedRobot,
    Unreachable,
    apply_action,
    check_grasp,
    fk,
    ik,
    initial_state,
    randomize_dynamics,
)
from gym_mobile_manipulation.trajectories import TrajectoryFamily, sample_spec

PARAMS = RobotParams()
HOME = np.array([0.5, 0.3, 0.5])


def test_fk_zero_pose_stretches_along_x():
    np.testing.assert_allclose(fk(np.zeros(3), 0.0, PARAMS), [0.817, 0.0, 0.5], atol=1e-12)


def test_fk_translates_with_the_base():
    q = np.array([0.3, -0.2, 1.1])
    np.testing.assert_allclose(fk(q, 0.4, PARAMS) - fk(q, 0.0, PARAMS), [0.4, 0.0, 0.0], atol=1e-12)


def test_fk_ik_round_trip():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 1000:
        q = rng.uniform(PARAMS.joint_limits[:, 0], PARAMS.joint_limits[:, 1])
        base_x = rng.uniform(*PARAMS.base_limits)
        target = fk(q, base_x, PARAMS)
        solution = ik(target, base_x, PARAMS)
        if isinstance(solution, Unreachable):
            continue
        assert solution[2] >= 0.0
        np.testing.assert_allclose(fk(solution, base_x, PARAMS), target, atol=1e-9)
        checked += 1


@pytest.mark.parametrize("target", [[1.6, 0.0, 0.5], [0.0, 0.0, 1.5], [0.05, 0.0, 0.5]])
def test_out_of_reach_target_is_clamped_onto_the_shell(target):
    solution = ik(np.array(target), 0.0, PARAMS)
    assert isinstance(solution, Unreachable)
    radius = np.linalg.norm(solution.clamped - [0.0, 0.0, 0.5])
    assert PARAMS.reach_min - 1e-9 <= radius <= PARAMS.reach_max + 1e-9
    np.testing.assert_allclose(fk(solution.q, 0.0, PARAMS), solution.clamped, atol=1e-9)


def test_far_target_clamps_to_max_reach():
    solution = ik(np.array([2.0, 0.0, 0.5]), 0.0, PARAMS)
    np.testing.assert_allclose(solution.clamped, [0.8, 0.0, 0.5], atol=1e-12)


def test_initial_state_puts_the_gripper_home():
    state = initial_state(PARAMS, HOME, [0.2, 0.2, 0.2])
    np.testing.assert_allclose(state.gripper_pos, HOME, atol=1e-9)
    assert not state.gripper_closed and not state.object_grasped
    assert state.step_index == 0


def test_zero_action_is_a_fixed_point():
    state = initial_state(PARAMS, HOME, HOME, dynamics=DynamicsParams(lag_alpha=0.7, actuation_gain=1.1))
    for _ in range(10):
        state = apply_action(state, np.zeros(4), PARAMS)
    np.testing.assert_array_equal(state.gripper_pos, initial_state(PARAMS, HOME, HOME).gripper_pos)
    assert state.base_x == 0.0
    np.testing.assert_array_equal(state.qd, np.zeros(3))


def test_nominal_dynamics_move_by_the_step_maximum():
    state = initial_state(PARAMS, HOME, HOME)
    moved = apply_action(state, np.array([1.0, -0.5, 0.0, 1.0]), PARAMS)
    np.testing.assert_allclose(moved.gripper_pos - state.gripper_pos, [0.05, -0.025, 0.0], atol=1e-9)
    assert moved.base_x == pytest.approx(0.05)
    assert moved.qd_base == pytest.approx(0.05 / PARAMS.control_dt)
    np.testing.assert_allclose(moved.gripper_vel, (moved.gripper_pos - state.gripper_pos) / PARAMS.control_dt)
    np.testing.assert_allclose(moved.qd, (moved.q - state.q) / PARAMS.control_dt)
    assert not moved.clamped


def test_command_lag_converges_to_the_gain():
    dynamics = DynamicsParams(actuation_gain=0.9, lag_alpha=0.5)
    state = initial_state(PARAMS, HOME, HOME, dynamics=dynamics)
    increments = []
    for _ in range(30):
        before = state.gripper_pos
        state = apply_action(state, np.array([0.0, 0.0, 0.2, 0.0]), PARAMS)
        increments.append(state.gripper_pos[2] - before[2])
    assert increments[0] == pytest.approx(0.5 * 0.9 * 0.2 * 0.05)
    assert increments[-1] == pytest.approx(0.9 * 0.2 * 0.05, rel=1e-6)
    assert np.all(np.diff(increments) >= -1e-15)


def test_base_is_clamped_to_its_rail():
    state = initial_state(PARAMS, HOME, HOME)
    for _ in range(30):
        state = apply_action(state, np.array([0.0, 0.0, 0.0, 1.0]), PARAMS)
    assert state.base_x == PARAMS.base_limits[1]
    assert state.clamped


def test_unreachable_increment_is_flagged():
    state = initial_state(PARAMS, np.array([0.79, 0.0, 0.5]), HOME)
    state = apply_action(state, np.array([1.0, 0.0, 0.0, 0.0]), PARAMS)
    assert state.clamped
    assert np.linalg.norm(state.gripper_pos - [0.0, 0.0, 0.5]) == pytest.approx(PARAMS.reach_max)


def _closing_state(distance):
    state = initial_state(PARAMS, HOME, HOME + np.array([distance, 0.0, 0.0]))
    return apply_action(state, np.array([0.0, 0.0, 0.0, 0.0, 1.0]), PARAMS)


def test_grasp_needs_a_closing_gripper_within_the_radius():
    assert check_grasp(_closing_state(0.04), PARAMS)
    assert not check_grasp(_closing_state(0.06), PARAMS)
    still_open = apply_action(initial_state(PARAMS, HOME, HOME), np.array([0.0, 0.0, 0.0, 0.0, -1.0]), PARAMS)
    assert not check_grasp(still_open, PARAMS)
    # already closed on the previous step
    held = apply_action(_closing_state(0.04), np.array([0.0, 0.0, 0.0, 0.0, 1.0]), PARAMS)
    assert not check_grasp(held, PARAMS)


def test_grasped_object_follows_the_gripper():
    robot = SimulatedRobot()
    robot.reset(HOME, HOME + np.array([0.01, 0.0, 0.0]))
    spec = sample_spec(TrajectoryFamily.CIRCLE, 0)
    robot.apply_action(np.array([0.0, 0.0, 0.0, 0.0, 1.0]))
    assert robot.latch_grasp()
    for _ in range(5):
        robot.apply_action(np.array([0.5, 0.0, 0.5, 0.0, 1.0]))
        robot.move_object(spec)
        np.testing.assert_array_equal(robot.state.object_pos, robot.state.gripper_pos)
        assert not robot.latch_grasp()
    assert robot.state.object_grasped


def test_object_follows_its_trajectory():
    robot = SimulatedRobot()
    spec = sample_spec(TrajectoryFamily.SQUARE, 4)
    robot.reset(HOME, spec.start)
    robot.apply_action(np.zeros(4))
    robot.move_object(spec)
    assert robot.state.step_index == 1
    assert np.linalg.norm(robot.state.object_pos - np.asarray(spec.start)) == pytest.approx(spec.speed * 0.04)


def test_randomize_dynamics_collapsed_ranges():
    ranges = DynamicsRanges(
        actuation_gain=(1.1, 1.1), lag_alpha=(0.7, 0.7), base_speed_scale=(0.9, 0.9), arm_speed_scale=(1.2, 1.2)
    )
    assert randomize_dynamics(5, ranges) == DynamicsParams(1.1, 0.7, 0.9, 1.2)


def test_randomize_dynamics_is_seeded_and_in_range():
    ranges = DynamicsRanges()
    assert randomize_dynamics(3, ranges) == randomize_dynamics(3, ranges)
    for seed in range(50):
        dynamics = randomize_dynamics(seed, ranges)
        for f in dataclasses.fields(DynamicsParams):
            lo, hi = getattr(ranges, f.name)
            assert lo <= getattr(dynamics, f.name) <= hi


def test_widened_ranges_keep_lag_in_unit_interval():
    widened = DynamicsRanges().widened(1.5)
    assert widened.actuation_gain == pytest.approx((0.7, 1.3))
    assert widened.lag_alpha[1] == 1.0
    assert widened.lag_alpha[0] == pytest.approx(0.5)


def test_invalid_reach_shell_is_rejected():
    with pytest.raises(ValueError):
        RobotParams(reach_min=0.9, reach_max=0.8)
