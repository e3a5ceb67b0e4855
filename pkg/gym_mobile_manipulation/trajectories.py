"""Seedable generators for the moving goals the robot has to track or grasp.

Six basic families are used for training (horizontal line, vertical line, circle, sine, square and
helix); a random composite chains fresh basic segments and is only used for testing. Every family
moves at a constant speed ``v``: each control step of ``dt`` seconds displaces the goal by exactly
``v * dt`` except on the steps where it bounces off the workspace bounds, where the displacement
is shorter. Square corners are turned inside one step without losing length.

Conventions

- Lines and sines reverse their travel direction when they reach the workspace bounds.
- Circles and squares live in a vertical x-z plane, the helix turns around a vertical axis.
- Circles, squares and helices are sized when sampled so that they fit inside the bounds.
"""

import enum
import functools
import math
from dataclasses import dataclass, field, fields

import numpy as np

from gym_mobile_manipulation.errors import PlacementError, WorkspaceTooSmallError

DT = 0.04
MAX_STEPS = 200

_AXES = ("x", "y", "z")
_PLACEMENT_TRIES = 64
SEED_SPACE = int(np.iinfo(np.int64).max)


class TrajectoryFamily(str, enum.Enum):
    HORIZONTAL_LINE = "horizontal_line"
    VERTICAL_LINE = "vertical_line"
    CIRCLE = "circle"
    SINE = "sine"
    SQUARE = "square"
    HELIX = "helix"
    RANDOM_COMPOSITE = "random"

    @property
    def is_basic(self):
        return self is not TrajectoryFamily.RANDOM_COMPOSITE


BASIC_FAMILIES = tuple(family for family in TrajectoryFamily if family.is_basic)


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned box (m) the goal has to stay in."""

    low: tuple[float, float, float] = (0.0, 0.0, 0.1)
    high: tuple[float, float, float] = (1.0, 0.6, 0.9)

    def __post_init__(self):
        if len(self.low) != 3 or len(self.high) != 3:
            raise ValueError(f"workspace corners must be 3-vectors, got {self.low} and {self.high}")
        object.__setattr__(self, "low", tuple(float(v) for v in self.low))
        object.__setattr__(self, "high", tuple(float(v) for v in self.high))
        for axis, lo, hi in zip(_AXES, self.low, self.high):
            if not hi > lo:
                raise ValueError(f"degenerate workspace along {axis}: [{lo}, {hi}]")

    @property
    def extent(self):
        return np.subtract(self.high, self.low)

    @property
    def center(self):
        return (np.asarray(self.low) + np.asarray(self.high)) / 2

    def contains(self, point, tol=1e-9):
        point = np.asarray(point)
        return bool(np.all(point >= np.asarray(self.low) - tol) and np.all(point <= np.asarray(self.high) + tol))


@dataclass(frozen=True)
class TrajectoryRanges:
    """Uniform sampling ranges of the trajectory parameters."""

    speed: tuple[float, float] = (0.05, 0.30)
    radius: tuple[float, float] = (0.10, 0.40)
    side_length: tuple[float, float] = (0.20, 0.50)
    amplitude: tuple[float, float] = (0.10, 0.30)
    wavelength: tuple[float, float] = (0.50, 1.50)
    vertical_speed: tuple[float, float] = (0.02, 0.10)
    composite_segments: tuple[int, int] = (3, 6)
    composite_duration: tuple[int, int] = (30, 80)


@dataclass(frozen=True)
class TrajectorySpec:
    """One parameterized moving-goal trajectory.

    ``direction`` is the unit travel axis for lines and sines, the unit initial velocity for circles
    and helices and the first edge for squares. ``phase`` is the angle of ``start`` around the
    circle/helix centre and ``orientation`` (+1/-1) the turning sense of circles, helices and
    squares. Composites keep their segments, the number of steps spent in each and the step size
    ``dt`` their segment joints were placed with.
    """

    family: TrajectoryFamily
    start: tuple[float, float, float]
    speed: float
    direction: tuple[float, float, float]
    bounds: Workspace
    seed: int
    radius: float = 0.0
    side_length: float = 0.0
    amplitude: float = 0.0
    wavelength: float = 0.0
    vertical_speed: float = 0.0
    phase: float = 0.0
    orientation: int = 1
    segments: tuple["TrajectorySpec", ...] = field(default=())
    durations: tuple[int, ...] = field(default=())
    dt: float = DT

    def to_fields(self, prefix=""):
        """Flatten into ``name -> text`` pairs, segments as ``segments.<k>.<name>``."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "segments":
                for k, segment in enumerate(value):
                    out.update(segment.to_fields(prefix=f"{prefix}segments.{k}."))
                continue
            if f.name == "bounds":
                out[f"{prefix}bounds.low"] = _format_values(value.low)
                out[f"{prefix}bounds.high"] = _format_values(value.high)
                continue
            if isinstance(value, TrajectoryFamily):
                text = value.value
            elif isinstance(value, tuple):
                text = _format_values(value)
            else:
                text = repr(value)
            out[f"{prefix}{f.name}"] = text
        return out

    @classmethod
    def from_fields(cls, values, prefix=""):
        segment_ids = sorted(
            {
                int(key[len(prefix) :].split(".")[1])
                for key in values
                if key.startswith(f"{prefix}segments.")
            }
        )
        segments = tuple(cls.from_fields(values, prefix=f"{prefix}segments.{k}.") for k in segment_ids)

        def get(name):
            return values[f"{prefix}{name}"]

        durations = get("durations")
        return cls(
            family=TrajectoryFamily(get("family")),
            start=_parse_floats(get("start")),
            speed=float(get("speed")),
            direction=_parse_floats(get("direction")),
            bounds=Workspace(_parse_floats(get("bounds.low")), _parse_floats(get("bounds.high"))),
            seed=int(get("seed")),
            radius=float(get("radius")),
            side_length=float(get("side_length")),
            amplitude=float(get("amplitude")),
            wavelength=float(get("wavelength")),
            vertical_speed=float(get("vertical_speed")),
            phase=float(get("phase")),
            orientation=int(get("orientation")),
            segments=segments,
            durations=tuple(int(v) for v in durations.split(",")) if durations else (),
            dt=float(get("dt")),
        )


@dataclass(frozen=True)
class GoalSample:
    position: np.ndarray
    velocity: np.ndarray


def _format_values(values):
    return ", ".join(repr(v) for v in values)


def _parse_floats(text):
    return tuple(float(v) for v in text.split(","))


def _unit(vector):
    vector = np.asarray(vector, dtype=np.float64)
    return vector / np.linalg.norm(vector)


def _uniform(rng, bounds):
    lo, hi = bounds
    return float(rng.uniform(lo, hi)) if hi > lo else float(lo)


def _sample_start(rng, lo, hi):
    return tuple(float(rng.uniform(a, b)) if b > a else float(a) for a, b in zip(lo, hi))


def _fit_range(family, value_range, workspace, axes, scale=1.0):
    """Clip the upper end of ``value_range`` so ``scale * value`` fits along every axis in ``axes``."""
    lo, hi = value_range
    extent = workspace.extent
    for axis in axes:
        if extent[axis] < scale * lo:
            raise WorkspaceTooSmallError(family.value, _AXES[axis], float(extent[axis]), scale * lo)
        hi = min(hi, extent[axis] / scale)
    return lo, hi


def sample_spec(family, rng_seed, workspace=None, ranges=None, start=None, dt=DT):
    """Sample one trajectory of ``family``; the same seed always gives the same spec.

    :param family: a basic ``TrajectoryFamily`` (use ``sample_composite`` for random composites)
    :param rng_seed: integer seed of the sampler
    :param workspace: bounds the trajectory must stay in, defaults to ``Workspace()``
    :param ranges: parameter sampling ranges, defaults to ``TrajectoryRanges()``
    :param start: force the start point (used to chain composite segments)
    :param dt: control step the random composite joins its segments with
    :raises WorkspaceTooSmallError: the workspace cannot hold the family at its minimum size
    """
    family = TrajectoryFamily(family)
    workspace = workspace or Workspace()
    ranges = ranges or TrajectoryRanges()
    if family is TrajectoryFamily.RANDOM_COMPOSITE:
        return sample_composite(rng_seed, workspace, ranges, dt=dt)
    rng = np.random.default_rng(rng_seed)
    return _SAMPLERS[family](family, rng, int(rng_seed), workspace, ranges, start)


def _sample_line(family, rng, seed, workspace, ranges, start):
    speed = _uniform(rng, ranges.speed)
    if family is TrajectoryFamily.HORIZONTAL_LINE:
        angle = rng.uniform(0.0, 2 * math.pi)
        direction = (math.cos(angle), math.sin(angle), 0.0)
    else:
        direction = (0.0, 0.0, 1.0 if rng.random() < 0.5 else -1.0)
    if start is None:
        start = _sample_start(rng, workspace.low, workspace.high)
    return TrajectorySpec(family, tuple(start), speed, direction, workspace, seed)


def _place_round(rng, family, start, radius_range, workspace, plane):
    """Sample radius, phase and centre of a circle through ``start`` lying in ``plane`` inside the bounds."""
    lo = np.asarray(workspace.low)
    hi = np.asarray(workspace.high)
    a, b = plane
    if start is None:
        radius = _uniform(rng, radius_range)
        phase = rng.uniform(0.0, 2 * math.pi)
        center = np.asarray(_sample_start(rng, lo + radius, hi - radius))
        off_plane = 3 - a - b
        center[off_plane] = rng.uniform(lo[off_plane], hi[off_plane])
        start = center.copy()
        start[a] += radius * math.cos(phase)
        start[b] += radius * math.sin(phase)
        return radius, phase, tuple(float(v) for v in start)
    start = np.asarray(start, dtype=np.float64)
    for _ in range(_PLACEMENT_TRIES):
        radius = _uniform(rng, radius_range)
        phase = rng.uniform(0.0, 2 * math.pi)
        ca = start[a] - radius * math.cos(phase)
        cb = start[b] - radius * math.sin(phase)
        if lo[a] + radius <= ca <= hi[a] - radius and lo[b] + radius <= cb <= hi[b] - radius:
            return radius, phase, tuple(float(v) for v in start)
    raise PlacementError(family.value, start)


def _sample_circle(family, rng, seed, workspace, ranges, start):
    radius_range = _fit_range(family, ranges.radius, workspace, (0, 2), scale=2.0)
    speed = _uniform(rng, ranges.speed)
    radius, phase, start = _place_round(rng, family, start, radius_range, workspace, (0, 2))
    orientation = 1 if rng.random() < 0.5 else -1
    direction = (-orientation * math.sin(phase), 0.0, orientation * math.cos(phase))
    return TrajectorySpec(
        family, start, speed, direction, workspace, seed, radius=radius, phase=phase, orientation=orientation
    )


def _sample_helix(family, rng, seed, workspace, ranges, start):
    radius_range = _fit_range(family, ranges.radius, workspace, (0, 1), scale=2.0)
    speed = _uniform(rng, ranges.speed)
    vz_lo, vz_hi = ranges.vertical_speed
    vertical_speed = _uniform(rng, (vz_lo, max(vz_lo, min(vz_hi, 0.9 * speed))))
    if vertical_speed >= speed:
        raise ValueError(f"helix speed {speed} must exceed its vertical speed {vertical_speed}")
    radius, phase, start = _place_round(rng, family, start, radius_range, workspace, (0, 1))
    orientation = 1 if rng.random() < 0.5 else -1
    rising = 1.0 if rng.random() < 0.5 else -1.0
    horizontal = math.sqrt(speed**2 - vertical_speed**2)
    direction = _unit(
        (
            -orientation * math.sin(phase) * horizontal,
            orientation * math.cos(phase) * horizontal,
            rising * vertical_speed,
        )
    )
    return TrajectorySpec(
        family,
        start,
        speed,
        tuple(float(v) for v in direction),
        workspace,
        seed,
        radius=radius,
        vertical_speed=vertical_speed,
        phase=phase,
        orientation=orientation,
    )


def _sample_sine(family, rng, seed, workspace, ranges, start):
    amp_lo, amp_hi = _fit_range(family, ranges.amplitude, workspace, (2,), scale=2.0)
    speed = _uniform(rng, ranges.speed)
    wavelength = _uniform(rng, ranges.wavelength)
    angle = rng.uniform(0.0, 2 * math.pi)
    direction = (math.cos(angle), math.sin(angle), 0.0)
    lo, hi = workspace.low, workspace.high
    if start is None:
        amplitude = _uniform(rng, (amp_lo, amp_hi))
        start = _sample_start(rng, (lo[0], lo[1], lo[2] + amplitude), (hi[0], hi[1], hi[2] - amplitude))
    else:
        room = min(start[2] - lo[2], hi[2] - start[2])
        if room < amp_lo:
            raise PlacementError(family.value, start)
        amplitude = _uniform(rng, (amp_lo, min(amp_hi, room)))
    return TrajectorySpec(
        family, tuple(start), speed, direction, workspace, seed, amplitude=amplitude, wavelength=wavelength
    )


def _square_edges(direction, orientation):
    e1 = np.asarray(direction, dtype=np.float64)
    e2 = orientation * np.array([-e1[2], 0.0, e1[0]])
    return e1, e2


def _square_offsets(direction, orientation, side):
    e1, e2 = _square_edges(direction, orientation)
    return np.stack([np.zeros(3), side * e1, side * (e1 + e2), side * e2])


_SQUARE_EDGES = ((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0, -1.0))


def _sample_square(family, rng, seed, workspace, ranges, start):
    side_range = _fit_range(family, ranges.side_length, workspace, (0, 2))
    speed = _uniform(rng, ranges.speed)
    lo = np.asarray(workspace.low)
    hi = np.asarray(workspace.high)
    tries = 1 if start is None else _PLACEMENT_TRIES
    for _ in range(tries):
        side = _uniform(rng, side_range)
        direction = _SQUARE_EDGES[int(rng.integers(len(_SQUARE_EDGES)))]
        orientation = 1 if rng.random() < 0.5 else -1
        offsets = _square_offsets(direction, orientation, side)
        start_lo = lo - offsets.min(axis=0)
        start_hi = hi - offsets.max(axis=0)
        if start is None:
            chosen = _sample_start(rng, start_lo, start_hi)
        elif np.all(np.asarray(start) >= start_lo) and np.all(np.asarray(start) <= start_hi):
            chosen = tuple(start)
        else:
            continue
        return TrajectorySpec(
            family, chosen, speed, direction, workspace, seed, side_length=side, orientation=orientation
        )
    raise PlacementError(family.value, start)


_SAMPLERS = {
    TrajectoryFamily.HORIZONTAL_LINE: _sample_line,
    TrajectoryFamily.VERTICAL_LINE: _sample_line,
    TrajectoryFamily.CIRCLE: _sample_circle,
    TrajectoryFamily.SINE: _sample_sine,
    TrajectoryFamily.SQUARE: _sample_square,
    TrajectoryFamily.HELIX: _sample_helix,
}


def sample_composite(rng_seed, workspace=None, ranges=None, dt=DT):
    """Chain 3-6 freshly sampled basic segments, each starting where the previous one ended.

    Families that cannot be placed through the previous end point (a circle through a corner of the
    bounds, for instance) are replaced by a line, which always fits.
    """
    workspace = workspace or Workspace()
    ranges = ranges or TrajectoryRanges()
    rng = np.random.default_rng(rng_seed)
    n_lo, n_hi = ranges.composite_segments
    d_lo, d_hi = ranges.composite_duration
    n_segments = int(rng.integers(n_lo, n_hi + 1))
    durations = [int(d) for d in rng.integers(d_lo, d_hi + 1, size=n_segments)]
    if sum(durations) < MAX_STEPS:
        durations[-1] += MAX_STEPS - sum(durations)

    segments = []
    start = None
    for duration in durations:
        segment_seed = int(rng.integers(SEED_SPACE))
        family = BASIC_FAMILIES[int(rng.integers(len(BASIC_FAMILIES)))]
        try:
            segment = sample_spec(family, segment_seed, workspace, ranges, start=start)
        except PlacementError:
            segment = sample_spec(TrajectoryFamily.HORIZONTAL_LINE, segment_seed, workspace, ranges, start=start)
        segments.append(segment)
        start = tuple(float(v) for v in positions(segment, n_steps=duration, dt=dt)[duration])

    first = segments[0]
    return TrajectorySpec(
        TrajectoryFamily.RANDOM_COMPOSITE,
        first.start,
        max(segment.speed for segment in segments),
        first.direction,
        workspace,
        int(rng_seed),
        segments=tuple(segments),
        durations=tuple(durations),
        dt=float(dt),
    )


def _axial_interval(start, direction, workspace):
    """Range of ``a`` such that ``start + a * direction`` stays inside the bounds; always contains 0."""
    a_min, a_max = -math.inf, math.inf
    for axis in range(3):
        d = direction[axis]
        if d == 0.0:
            continue
        t1 = (workspace.low[axis] - start[axis]) / d
        t2 = (workspace.high[axis] - start[axis]) / d
        a_min = max(a_min, min(t1, t2))
        a_max = min(a_max, max(t1, t2))
    return min(a_min, 0.0), max(a_max, 0.0)


def _triangle(s, a_min, a_max):
    """Back-and-forth coordinate after travelling ``s`` from 0 inside ``[a_min, a_max]``, and its slope."""
    length = a_max - a_min
    if length <= 0.0:
        return np.zeros_like(s), np.zeros_like(s)
    m = np.mod(s - a_min, 2 * length)
    value = a_min + np.where(m <= length, m, 2 * length - m)
    slope = np.where(m < length, 1.0, -1.0)
    return value, slope


def _line_positions(spec, n_steps, dt):
    start = np.asarray(spec.start)
    direction = np.asarray(spec.direction)
    a_min, a_max = _axial_interval(spec.start, spec.direction, spec.bounds)
    travel = spec.speed * dt * np.arange(n_steps + 1)
    axial, _ = _triangle(travel, a_min, a_max)
    return start + axial[:, None] * direction


def _circle_positions(spec, n_steps, dt):
    center = np.asarray(spec.start) - spec.radius * np.array([math.cos(spec.phase), 0.0, math.sin(spec.phase)])
    step_angle = 2 * math.asin(spec.speed * dt / (2 * spec.radius))
    theta = spec.phase + spec.orientation * step_angle * np.arange(n_steps + 1)
    out = np.repeat(center[None, :], n_steps + 1, axis=0)
    out[:, 0] += spec.radius * np.cos(theta)
    out[:, 2] += spec.radius * np.sin(theta)
    return out


def _helix_positions(spec, n_steps, dt):
    start = np.asarray(spec.start)
    center = start[:2] - spec.radius * np.array([math.cos(spec.phase), math.sin(spec.phase)])
    chord = math.sqrt((spec.speed * dt) ** 2 - (spec.vertical_speed * dt) ** 2)
    step_angle = 2 * math.asin(chord / (2 * spec.radius))
    steps = np.arange(n_steps + 1)
    theta = spec.phase + spec.orientation * step_angle * steps
    rising = 1.0 if spec.direction[2] >= 0 else -1.0
    z_min = spec.bounds.low[2] - start[2]
    z_max = spec.bounds.high[2] - start[2]
    dz, _ = _triangle(rising * spec.vertical_speed * dt * steps, min(z_min, 0.0), max(z_max, 0.0))
    out = np.empty((n_steps + 1, 3))
    out[:, 0] = center[0] + spec.radius * np.cos(theta)
    out[:, 1] = center[1] + spec.radius * np.sin(theta)
    out[:, 2] = start[2] + dz
    return out


def _square_positions(spec, n_steps, dt):
    """Walk the edges in steps of chord length ``speed * dt``.

    A step that would run past a corner lands on the next edge instead, at distance
    ``sqrt(step^2 - remaining^2)`` from the corner (adjacent edges are perpendicular).
    """
    corners = np.asarray(spec.start) + _square_offsets(spec.direction, spec.orientation, spec.side_length)
    edges = np.roll(corners, -1, axis=0) - corners
    lengths = np.linalg.norm(edges, axis=1)
    edges = edges / lengths[:, None]
    step = spec.speed * dt
    if step >= lengths.min():
        raise ValueError(f"square side {lengths.min()} must exceed the step length {step}")
    out = np.empty((n_steps + 1, 3))
    out[0] = corners[0]
    edge, along = 0, 0.0
    for k in range(1, n_steps + 1):
        remaining = lengths[edge] - along
        if step <= remaining:
            along += step
        else:
            edge = (edge + 1) % 4
            along = math.sqrt(step**2 - remaining**2)
        out[k] = corners[edge] + along * edges[edge]
    return out


class _SineCurve:
    def __init__(self, spec):
        self.start = np.asarray(spec.start)
        self.direction = np.asarray(spec.direction)
        self.amplitude = spec.amplitude
        self.wavenumber = 2 * math.pi / spec.wavelength
        self.a_min, self.a_max = _axial_interval(spec.start, spec.direction, spec.bounds)

    def point(self, s):
        axial, _ = _triangle(np.float64(s), self.a_min, self.a_max)
        out = self.start + float(axial) * self.direction
        out[2] += self.amplitude * math.sin(self.wavenumber * s)
        return out

    def tangent(self, s):
        _, slope = _triangle(np.float64(s), self.a_min, self.a_max)
        out = float(slope) * self.direction
        out[2] += self.amplitude * self.wavenumber * math.cos(self.wavenumber * s)
        return out


def _sine_positions(spec, n_steps, dt, tol=1e-12, max_iter=50):
    """Advance the curve parameter so that every chord has length ``speed * dt``.

    The chord length is at least the parameter increment, so the root lies in ``(0, speed * dt]``;
    safeguarded Newton iterations find it. Steps across a reversal may have no root, those take the
    full increment and come out shorter.
    """
    curve = _SineCurve(spec)
    step = spec.speed * dt
    out = np.empty((n_steps + 1, 3))
    out[0] = curve.start
    s = 0.0
    for k in range(1, n_steps + 1):
        here = out[k - 1]
        chord = curve.point(s + step) - here
        if np.linalg.norm(chord) <= step:
            s += step
            out[k] = curve.point(s)
            continue
        lo, hi = 0.0, step
        slope = abs(curve.tangent(s)[2])
        delta = step / math.sqrt(1.0 + slope**2) if slope else step
        for _ in range(max_iter):
            chord = curve.point(s + delta) - here
            length = np.linalg.norm(chord)
            g = length - step
            if abs(g) <= tol:
                break
            if g > 0:
                hi = delta
            else:
                lo = delta
            derivative = float(chord @ curve.tangent(s + delta)) / length if length > 0 else 1.0
            candidate = delta - g / derivative if derivative > 0 else -1.0
            delta = candidate if lo < candidate < hi else 0.5 * (lo + hi)
        s += delta
        out[k] = curve.point(s)
    return out


def _composite_positions(spec, n_steps, dt):
    if dt != spec.dt:
        raise ValueError(f"composite segments were joined for dt={spec.dt}, cannot step it with dt={dt}")
    chunks = [np.asarray(spec.start)[None, :]]
    done = 0
    for index, (segment, duration) in enumerate(zip(spec.segments, spec.durations)):
        last = index == len(spec.segments) - 1
        length = max(duration, n_steps - done) if last else duration
        chunks.append(positions(segment, n_steps=length, dt=dt)[1:])
        done += length
    return np.concatenate(chunks)[: n_steps + 1]


_GENERATORS = {
    TrajectoryFamily.HORIZONTAL_LINE: _line_positions,
    TrajectoryFamily.VERTICAL_LINE: _line_positions,
    TrajectoryFamily.CIRCLE: _circle_positions,
    TrajectoryFamily.SINE: _sine_positions,
    TrajectoryFamily.SQUARE: _square_positions,
    TrajectoryFamily.HELIX: _helix_positions,
    TrajectoryFamily.RANDOM_COMPOSITE: _composite_positions,
}


@functools.lru_cache(maxsize=2048)
def _cached_positions(spec, n_steps, dt):
    out = _GENERATORS[spec.family](spec, n_steps, dt)
    out[0] = spec.start
    out.flags.writeable = False
    return out


def positions(spec, n_steps=MAX_STEPS, dt=DT):
    """Goal positions at steps ``0..n_steps`` as a read-only ``(n_steps + 1, 3)`` array."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return _cached_positions(spec, int(n_steps), float(dt))


def goal_at(spec, step, dt=DT):
    """Goal position and finite-difference velocity at ``step``."""
    if step < 0:
        raise ValueError(f"step must be non-negative, got {step}")
    path = positions(spec, n_steps=max(MAX_STEPS, step), dt=dt)
    position = path[step].copy()
    if step == 0:
        return GoalSample(position, np.zeros(3))
    return GoalSample(position, (position - path[step - 1]) / dt)
