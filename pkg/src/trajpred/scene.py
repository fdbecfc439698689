"""Domain types for agents, samples and predictions, and the target-centric frame.

Every downstream module assumes samples have been passed through
:func:`to_target_frame`: the target agent sits at the origin at the current
timestep with its heading along +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

HISTORY_STEPS = 4  # T_h: 2 s of history at 2 Hz, plus the current state
FUTURE_STEPS = 12  # T_f: 6 s horizon at 2 Hz
DT = 0.5
DEFAULT_NUM_MODES = 5

OBJECT_CLASSES = ("car", "truck", "bus", "bicycle", "motorcycle", "pedestrian", "other")


class InvalidSampleError(ValueError):
    pass


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class AgentState:
    x: float
    y: float
    heading: float
    v: float
    a: float
    yaw_rate: float
    t: int
    # False for steps padded backward before the agent was first observed.
    valid: bool = True

    def features(self) -> tuple[float, float, float, float, float]:
        return (self.x, self.y, self.v, self.a, self.yaw_rate)


@dataclass(frozen=True)
class ObjectInfo:
    object_class: str
    length: float
    width: float

    @property
    def area(self) -> float:
        return self.length * self.width


@dataclass(frozen=True)
class AgentTrack:
    agent_id: str
    info: ObjectInfo
    states: tuple[AgentState, ...]

    @property
    def current(self) -> AgentState:
        return self.states[-1]


@dataclass
class VectorMap:
    """Static map layers; polygons are implicitly closed (last vertex joins the first)."""

    drivable_polygons: list[np.ndarray] = field(default_factory=list)
    lane_centerlines: list[np.ndarray] = field(default_factory=list)
    crosswalks: list[np.ndarray] = field(default_factory=list)
    sidewalks: list[np.ndarray] = field(default_factory=list)

    LAYERS = ("drivable_polygons", "lane_centerlines", "crosswalks", "sidewalks")

    def layers(self):
        for name in self.LAYERS:
            yield name, getattr(self, name)

    def map_arrays(self, fn) -> "VectorMap":
        return VectorMap(**{name: [fn(np.asarray(a, dtype=float)) for a in arrays]
                            for name, arrays in self.layers()})


@dataclass
class Sample:
    sample_id: str
    target: AgentTrack
    neighbors: list[AgentTrack]
    map: VectorMap
    future: np.ndarray  # (FUTURE_STEPS, 2)

    def agents(self) -> list[AgentTrack]:
        return [self.target, *self.neighbors]


@dataclass
class PredictionSet:
    modes: np.ndarray  # (K, FUTURE_STEPS, 2)
    probabilities: np.ndarray  # (K,)

    def __post_init__(self):
        self.modes = np.asarray(self.modes, dtype=float)
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.modes.ndim != 3 or self.modes.shape[2] != 2:
            raise ValueError(f"modes must have shape (K, T, 2), got {self.modes.shape}")
        if self.probabilities.shape != (self.modes.shape[0],):
            raise ValueError("one probability per mode is required")
        if not np.all(np.isfinite(self.modes)):
            raise ValueError("non-finite waypoint in prediction")
        if np.any(self.probabilities < 0) or abs(self.probabilities.sum() - 1.0) > 1e-6:
            raise ValueError("mode probabilities must be non-negative and sum to 1")

    @property
    def num_modes(self) -> int:
        return self.modes.shape[0]


def _transform_state(state: AgentState, rot: np.ndarray, trans: np.ndarray, dtheta: float) -> AgentState:
    x, y = rot @ np.array([state.x, state.y]) + trans
    return replace(state, x=float(x), y=float(y), heading=wrap_angle(state.heading + dtheta))


def _transform_track(track: AgentTrack, rot, trans, dtheta) -> AgentTrack:
    states = tuple(_transform_state(s, rot, trans, dtheta) for s in track.states)
    return replace(track, states=states)


def transform_sample(sample: Sample, dtheta: float, translation: Sequence[float]) -> Sample:
    """Apply the rigid motion p -> R(dtheta) p + translation to every position in the sample."""
    c, s = math.cos(dtheta), math.sin(dtheta)
    rot = np.array([[c, -s], [s, c]])
    trans = np.asarray(translation, dtype=float)

    def move(points: np.ndarray) -> np.ndarray:
        return points @ rot.T + trans

    return Sample(
        sample_id=sample.sample_id,
        target=_transform_track(sample.target, rot, trans, dtheta),
        neighbors=[_transform_track(n, rot, trans, dtheta) for n in sample.neighbors],
        map=sample.map.map_arrays(move),
        future=move(np.asarray(sample.future, dtype=float)),
    )


def to_target_frame(sample: Sample) -> Sample:
    """Express the sample in the frame of the target's current pose.

    Positions become p' = R(-theta)(p - t); headings are shifted by -theta.
    Speeds, accelerations and yaw rates are frame invariant and left alone.
    """
    cur = sample.target.current
    pose = (cur.x, cur.y, cur.heading)
    if not all(math.isfinite(v) for v in pose):
        raise InvalidSampleError(f"{sample.sample_id}: non-finite target pose {pose}")
    theta = cur.heading
    c, s = math.cos(-theta), math.sin(-theta)
    origin = np.array([cur.x, cur.y])
    trans = -(np.array([[c, -s], [s, c]]) @ origin)
    out = transform_sample(sample, -theta, trans)
    # Pin the target's own pose exactly; rounding would otherwise leave ~1e-16 residue.
    states = list(out.target.states)
    states[-1] = replace(states[-1], x=0.0, y=0.0, heading=0.0)
    out.target = replace(out.target, states=tuple(states))
    return out


def _finite(values) -> bool:
    return bool(np.all(np.isfinite(np.asarray(values, dtype=float))))


def _track_violations(name: str, track: AgentTrack) -> list[str]:
    problems = []
    info = track.info
    if info.object_class not in OBJECT_CLASSES:
        problems.append(f"{name}: unknown object class {info.object_class!r}")
    if not (_finite([info.length, info.width]) and info.length >= info.width > 0):
        problems.append(f"{name}: physical size must satisfy length >= width > 0")
    if len(track.states) != HISTORY_STEPS + 1:
        problems.append(f"{name}: history length {len(track.states)} != {HISTORY_STEPS + 1}")
    steps = [s.t for s in track.states]
    if any(b - a != 1 for a, b in zip(steps, steps[1:])):
        problems.append(f"{name}: timesteps must increase by exactly 1, got {steps}")
    bad = [s.t for s in track.states
           if not _finite([s.x, s.y, s.heading, s.v, s.a, s.yaw_rate])]
    if bad:
        problems.append(f"{name}: non-finite state values at t={bad}")
    elif any(not (-math.pi < s.heading <= math.pi) for s in track.states):
        problems.append(f"{name}: heading outside (-pi, pi]")
    if track.states and not track.states[-1].valid:
        problems.append(f"{name}: current state is marked invalid")
    return problems


def validate_sample(sample: Sample) -> list[str]:
    """Return every invariant violation found in ``sample``; empty means valid."""
    problems = _track_violations("target", sample.target)
    for i, nbr in enumerate(sample.neighbors):
        problems += _track_violations(f"neighbor[{i}]", nbr)
    future = np.asarray(sample.future, dtype=float)
    if future.ndim != 2 or future.shape[-1] != 2 or len(future) != FUTURE_STEPS:
        problems.append(f"future length {len(future)} != {FUTURE_STEPS}")
    elif not _finite(future):
        problems.append("future: non-finite waypoint")
    for name, arrays in sample.map.layers():
        min_vertices = 2 if name == "lane_centerlines" else 3
        for i, arr in enumerate(arrays):
            arr = np.asarray(arr, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < min_vertices:
                problems.append(f"map.{name}[{i}]: needs >= {min_vertices} vertices of (x, y)")
            elif not _finite(arr):
                problems.append(f"map.{name}[{i}]: non-finite vertex")
    return problems
