"""Kinematic mobile manipulator: a base sliding along x that carries a pan + two-link arm.

Kinematic convention

- The shoulder sits at ``(base_x, 0, shoulder_height)``.
- ``q[0]`` pans the arm about the vertical axis, ``q[1]`` lifts the upper arm above the horizontal
  plane and ``q[2]`` bends the elbow relative to the upper arm.
- At ``q = (0, 0, 0)`` the arm is stretched along +x: the gripper is at
  ``(base_x + link1_length + link2_length, 0, shoulder_height)``.
- Inverse kinematics returns the elbow-down branch, ``q[2] >= 0``, where the elbow lies below the
  shoulder-gripper line.

Actuation goes through a first-order command filter whose gain and lag are randomized per episode.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from gym_mobile_manipulation.trajectories import DT, goal_at


@dataclass(frozen=True)
class RobotParams:
    link1_length: float = 0.425
    link2_length: float = 0.392
    shoulder_height: float = 0.5
    pan_limits: tuple[float, float] = (-math.pi, math.pi)
    lift_limits: tuple[float, float] = (-math.pi, math.pi)
    elbow_limits: tuple[float, float] = (0.0, math.pi)
    reach_min: float = 0.30
    reach_max: float = 0.80
    base_limits: tuple[float, float] = (-1.0, 1.0)
    base_step_max: float = 0.05
    ee_step_max: float = 0.05
    gripper_grasp_radius: float = 0.05
    control_dt: float = DT

    def __post_init__(self):
        if not 0 < self.reach_min < self.reach_max <= self.link1_length + self.link2_length:
            raise ValueError(
                f"reach shell [{self.reach_min}, {self.reach_max}] must satisfy "
                f"0 < reach_min < reach_max <= {self.link1_length + self.link2_length}"
            )
        if self.base_step_max <= 0 or self.ee_step_max <= 0:
            raise ValueError("step maxima must be positive")
        for name in ("pan_limits", "lift_limits", "elbow_limits", "base_limits"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{name} must be a finite increasing pair, got {(lo, hi)}")
        if self.control_dt <= 0:
            raise ValueError(f"control_dt must be positive, got {self.control_dt}")

    @property
    def joint_limits(self):
        return np.array([self.pan_limits, self.lift_limits, self.elbow_limits])

    @property
    def step_scale(self):
        """Per-component size of a unit action: three gripper axes then the base."""
        return np.array([self.ee_step_max] * 3 + [self.base_step_max])


@dataclass(frozen=True)
class DynamicsParams:
    actuation_gain: float = 1.0
    lag_alpha: float = 1.0
    base_speed_scale: float = 1.0
    arm_speed_scale: float = 1.0


@dataclass(frozen=True)
class DynamicsRanges:
    """Uniform randomization ranges of the actuation surrogates of mass, inertia, friction and damping."""

    actuation_gain: tuple[float, float] = (0.8, 1.2)
    lag_alpha: tuple[float, float] = (0.6, 1.0)
    base_speed_scale: tuple[float, float] = (0.8, 1.2)
    arm_speed_scale: tuple[float, float] = (0.8, 1.2)

    def __post_init__(self):
        for name in ("actuation_gain", "lag_alpha", "base_speed_scale", "arm_speed_scale"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"dynamics range {name} must satisfy 0 < low <= high, got {(lo, hi)}")
        if self.lag_alpha[1] > 1.0:
            raise ValueError(f"lag_alpha must stay in (0, 1], got {self.lag_alpha}")

    def widened(self, factor):
        """Scale every range about its centre by ``factor``; lag_alpha stays in (0, 1], the rest positive."""

        def widen(bounds, ceiling=math.inf):
            center = (bounds[0] + bounds[1]) / 2
            half = factor * (bounds[1] - bounds[0]) / 2
            return max(center - half, 1e-3), min(center + half, ceiling)

        return DynamicsRanges(
            actuation_gain=widen(self.actuation_gain),
            lag_alpha=widen(self.lag_alpha, ceiling=1.0),
            base_speed_scale=widen(self.base_speed_scale),
            arm_speed_scale=widen(self.arm_speed_scale),
        )


@dataclass(frozen=True)
class Unreachable:
    """IK target outside the reachable shell; ``clamped`` is its radial projection onto the shell."""

    clamped: np.ndarray
    q: np.ndarray


@dataclass
class SimState:
    """Robot and object state. Transitions return new states and never modify arrays in place."""

    base_x: float
    q: np.ndarray
    qd_base: float
    qd: np.ndarray
    gripper_closed: bool
    gripper_pos: np.ndarray
    object_pos: np.ndarray
    object_vel: np.ndarray
    object_grasped: bool
    prev_command: np.ndarray
    step_index: int
    dynamics: DynamicsParams
    gripper_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    prev_gripper_closed: bool = False
    clamped: bool = False


def shoulder_position(base_x, params):
    return np.array([base_x, 0.0, params.shoulder_height])


def fk(q, base_x, params):
    """Gripper (TCP) position for joint angles ``q`` with the base at ``base_x``."""
    pan, lift, elbow = q
    reach = params.link1_length * math.cos(lift) + params.link2_length * math.cos(lift + elbow)
    height = params.link1_length * math.sin(lift) + params.link2_length * math.sin(lift + elbow)
    return shoulder_position(base_x, params) + np.array([reach * math.cos(pan), reach * math.sin(pan), height])


def _solve_arm(offset, params):
    l1, l2 = params.link1_length, params.link2_length
    dx, dy, dz = offset
    pan = math.atan2(dy, dx)
    horizontal = math.hypot(dx, dy)
    cos_elbow = (horizontal**2 + dz**2 - l1**2 - l2**2) / (2 * l1 * l2)
    elbow = math.acos(min(1.0, max(-1.0, cos_elbow)))
    lift = math.atan2(dz, horizontal) - math.atan2(l2 * math.sin(elbow), l1 + l2 * math.cos(elbow))
    return np.array([pan, lift, elbow])


def ik(target, base_x, params):
    """Elbow-down joint angles reaching ``target``, or ``Unreachable`` with the closest reachable point.

    :param target: gripper target in world coordinates
    :param base_x: base position the arm is solved for
    :return: numpy array of joint angles, or ``Unreachable(clamped, q)`` where ``q`` reaches ``clamped``
    """
    shoulder = shoulder_position(base_x, params)
    offset = np.asarray(target, dtype=np.float64) - shoulder
    distance = float(np.linalg.norm(offset))
    if params.reach_min <= distance <= params.reach_max:
        q = _solve_arm(offset, params)
        limits = params.joint_limits
        if np.all(q >= limits[:, 0]) and np.all(q <= limits[:, 1]):
            return q
        q = np.clip(q, limits[:, 0], limits[:, 1])
        return Unreachable(clamped=fk(q, base_x, params), q=q)
    if distance == 0.0:
        offset, distance = np.array([1.0, 0.0, 0.0]), 1.0
    radius = min(max(distance, params.reach_min), params.reach_max)
    clamped = shoulder + offset * (radius / distance)
    q = np.clip(_solve_arm(clamped - shoulder, params), params.joint_limits[:, 0], params.joint_limits[:, 1])
    return Unreachable(clamped=clamped, q=q)


def _uniform(rng, bounds):
    lo, hi = bounds
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def randomize_dynamics(rng_seed, ranges=None):
    """Draw one set of actuation parameters uniformly from ``ranges``; seed-deterministic."""
    ranges = ranges or DynamicsRanges()
    rng = np.random.default_rng(rng_seed)
    return DynamicsParams(
        actuation_gain=_uniform(rng, ranges.actuation_gain),
        lag_alpha=_uniform(rng, ranges.lag_alpha),
        base_speed_scale=_uniform(rng, ranges.base_speed_scale),
        arm_speed_scale=_uniform(rng, ranges.arm_speed_scale),
    )


def initial_state(params, home_target, object_pos, dynamics=None, base_x=0.0):
    """Robot at rest with the gripper on (the closest reachable point to) ``home_target``."""
    solution = ik(home_target, base_x, params)
    q = solution.q if isinstance(solution, Unreachable) else solution
    return SimState(
        base_x=float(base_x),
        q=q,
        qd_base=0.0,
        qd=np.zeros(3),
        gripper_closed=False,
        gripper_pos=fk(q, base_x, params),
        object_pos=np.asarray(object_pos, dtype=np.float64).copy(),
        object_vel=np.zeros(3),
        object_grasped=False,
        prev_command=np.zeros(4),
        step_index=0,
        dynamics=dynamics or DynamicsParams(),
    )


def apply_action(state, action, params):
    """Advance the robot one control step.

    Action shape: ``[dx, dy, dz, dbase]`` or ``[dx, dy, dz, dbase, gripper]`` in ``[-1, 1]``. The
    gripper increment is applied in world coordinates, so base motion does not drag the gripper;
    targets out of reach are clamped onto the reachable shell and flagged in ``state.clamped``.
    """
    action = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
    dynamics = state.dynamics
    speed_scale = np.array([dynamics.arm_speed_scale] * 3 + [dynamics.base_speed_scale])
    command = action[:4] * params.step_scale * speed_scale
    increment = (
        dynamics.lag_alpha * dynamics.actuation_gain * command + (1.0 - dynamics.lag_alpha) * state.prev_command
    )

    wanted_base = state.base_x + increment[3]
    base_x = float(np.clip(wanted_base, *params.base_limits))
    base_delta = base_x - state.base_x
    clamped = base_x != wanted_base

    if not np.any(increment[:3]) and base_delta == 0.0:
        q = state.q
    else:
        solution = ik(state.gripper_pos + increment[:3], base_x, params)
        if isinstance(solution, Unreachable):
            q = solution.q
            clamped = True
        else:
            q = solution
    gripper_pos = fk(q, base_x, params) if q is not state.q else state.gripper_pos

    gripper_closed = state.gripper_closed
    if action.shape[0] > 4:
        gripper_closed = bool(action[4] > 0.0)

    dt = params.control_dt
    return replace(
        state,
        base_x=base_x,
        q=q,
        qd_base=base_delta / dt,
        qd=(q - state.q) / dt,
        gripper_pos=gripper_pos,
        gripper_vel=(gripper_pos - state.gripper_pos) / dt,
        gripper_closed=gripper_closed,
        prev_gripper_closed=state.gripper_closed,
        prev_command=increment,
        step_index=state.step_index + 1,
        clamped=clamped,
    )


def step_object(state, spec, dt=DT):
    """Move the object along ``spec`` at the current step, or with the gripper once it is grasped."""
    if state.object_grasped:
        return replace(state, object_pos=state.gripper_pos.copy(), object_vel=state.gripper_vel.copy())
    goal = goal_at(spec, state.step_index, dt=dt)
    return replace(state, object_pos=goal.position, object_vel=goal.velocity)


def check_grasp(state, params):
    """True on the step the gripper closes with the object within ``gripper_grasp_radius``."""
    closing = state.gripper_closed and not state.prev_gripper_closed
    distance = float(np.linalg.norm(state.object_pos - state.gripper_pos))
    return bool(closing and distance <= params.gripper_grasp_radius)


class SimulatedRobot:
    def __init__(self, params=None) -> None:
        """
        :param params: kinematic and actuation limits, defaults to ``RobotParams()``
        """
        self.params = params or RobotParams()
        self.state = None

    def reset(self, home_target, object_pos, dynamics=None, base_x=0.0):
        self.state = initial_state(self.params, home_target, object_pos, dynamics=dynamics, base_x=base_x)
        return self.state

    def apply_action(self, action):
        self.state = apply_action(self.state, action, self.params)
        return self.state

    def move_object(self, spec):
        self.state = step_object(self.state, spec, dt=self.params.control_dt)
        return self.state

    def latch_grasp(self):
        """Attach the object to the gripper if this step is a successful grasp; the grasp never releases."""
        success = check_grasp(self.state, self.params)
        if success:
            self.state = replace(self.state, object_grasped=True)
        return success
