"""Synthetic driving scenarios, the line-delimited interchange format and dataset splits.

Scenes are built around a road whose centreline is a chain of straight and
constant-curvature pieces.  Agents are driven along their lanes by a
kinematic bicycle whose steering is set from the curvature of the piece it is
on, so sampled poses lie exactly on the lane geometry.  The target's current
pose is the origin with heading 0; the road ahead then does the interesting
part (turn, U-turn, fork) at or after the current time, so the recent history
is always on the straight approach.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .scene import (
    DT,
    FUTURE_STEPS,
    HISTORY_STEPS,
    OBJECT_CLASSES,
    AgentState,
    AgentTrack,
    ObjectInfo,
    Sample,
    VectorMap,
    wrap_angle,
)

SCENARIO_KINDS = ("straight", "left_turn", "right_turn", "u_turn", "fork")

LANE_WIDTH = 3.5
SIDEWALK_WIDTH = 2.5
CROSSWALK_DEPTH = 3.0

# Nominal (length, width) in metres, jittered per agent.
CLASS_DIMENSIONS = {
    "car": (4.5, 1.9),
    "truck": (8.0, 2.5),
    "bus": (11.0, 2.9),
    "bicycle": (1.8, 0.6),
    "motorcycle": (2.2, 0.8),
    "pedestrian": (0.6, 0.5),
    "other": (3.0, 1.5),
}


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    target_speed: float
    n_neighbors: int = 0
    noise_std: float = 0.0
    seed: int = 0
    # Forces the fork branch ("left"/"right"); None draws it from the seed.
    branch: str | None = None

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.target_speed < 0 or self.noise_std < 0 or self.n_neighbors < 0:
            raise ValueError("target_speed, noise_std and n_neighbors must be non-negative")
        if self.branch not in (None, "left", "right"):
            raise ValueError("branch must be 'left', 'right' or None")


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    split_seed: int


class InterchangeError(ValueError):
    def __init__(self, record: int, field: str, reason: str):
        super().__init__(f"record {record}: field {field!r}: {reason}")
        self.record = record
        self.field = field


# ---------------------------------------------------------------------------
# geometry


class RoadPath:
    """Chain of (length, curvature) pieces starting from a pose at arc length 0.

    Arc lengths before 0 extend the first piece's tangent backwards; arc
    lengths past the end extend the last heading straight ahead.
    """

    def __init__(self, start: tuple[float, float, float], pieces: Sequence[tuple[float, float]]):
        self.start = start
        self.pieces = [(float(length), float(k)) for length, k in pieces if length > 0]
        self._knots = [start]
        self._offsets = [0.0]
        pose = start
        for length, k in self.pieces:
            pose = _advance_arc(pose, length, k)
            self._knots.append(pose)
            self._offsets.append(self._offsets[-1] + length)

    @property
    def length(self) -> float:
        return self._offsets[-1]

    def curvature(self, s: float) -> float:
        for (length, k), s0 in zip(self.pieces, self._offsets):
            if s0 <= s < s0 + length:
                return k
        return 0.0

    def piece_end(self, s: float) -> float:
        """Arc length at which the piece containing ``s`` ends (inf past the last knot)."""
        if s < 0:
            return 0.0
        for s1 in self._offsets[1:]:
            if s < s1:
                return s1
        return math.inf

    def pose(self, s: float) -> tuple[float, float, float]:
        if s < 0:
            return _advance_arc(self.start, s, 0.0)
        for i, (length, k) in enumerate(self.pieces):
            if s < self._offsets[i + 1]:
                return _advance_arc(self._knots[i], s - self._offsets[i], k)
        return _advance_arc(self._knots[-1], s - self.length, 0.0)

    def polyline(self, s0: float, s1: float, offset: float = 0.0, step: float = 1.0) -> np.ndarray:
        breaks = [s for s in self._offsets if s0 < s < s1]
        grid = np.unique(np.concatenate([np.arange(s0, s1, step), breaks, [s1]]))
        pts = []
        for s in grid:
            x, y, th = self.pose(float(s))
            pts.append((x - offset * math.sin(th), y + offset * math.cos(th)))
        return np.array(pts)

    def offset_path(self, offset: float, reverse: bool = False, s0: float = -60.0, s1: float | None = None) -> "RoadPath":
        """Lane parallel to this one at lateral ``offset`` (left positive), optionally reversed.

        The returned path's arc length 0 sits abreast of ``s0`` on this path
        (or of ``s1`` when reversed), and it covers the stretch [s0, s1].
        """
        s1 = self.length + 100.0 if s1 is None else s1
        pieces = []
        for length, k, a, b in self._pieces_between(s0, s1):
            scale = 1.0 - offset * k
            if scale <= 0:
                raise ValueError("lane offset exceeds curve radius")
            pieces.append((length * scale, k / scale))
        anchor = s1 if reverse else s0
        x, y, th = self.pose(anchor)
        x, y = x - offset * math.sin(th), y + offset * math.cos(th)
        if reverse:
            pieces = [(length, -k) for length, k in reversed(pieces)]
            th = wrap_angle(th + math.pi)
        return RoadPath((x, y, th), pieces)

    def _pieces_between(self, s0: float, s1: float):
        bounds = [-math.inf, *self._offsets, math.inf]
        curv = [0.0] + [k for _, k in self.pieces] + [0.0]
        for a, b, k in zip(bounds[:-1], bounds[1:], curv):
            lo, hi = max(a, s0), min(b, s1)
            if hi > lo:
                yield hi - lo, k, lo, hi


def _advance_arc(pose, ds: float, curvature: float):
    x, y, th = pose
    if abs(curvature) < 1e-12:
        return x + ds * math.cos(th), y + ds * math.sin(th), th
    th1 = th + curvature * ds
    return (x + (math.sin(th1) - math.sin(th)) / curvature,
            y - (math.cos(th1) - math.cos(th)) / curvature,
            wrap_angle(th1))


@dataclass(frozen=True)
class KinematicBicycle:
    """Rear-axle kinematic bicycle with piecewise-constant speed and steering."""

    wheelbase: float

    def steering_for_curvature(self, curvature: float) -> float:
        return math.atan(curvature * self.wheelbase)

    def yaw_rate(self, speed: float, steering: float) -> float:
        return speed * math.tan(steering) / self.wheelbase

    def advance(self, pose, speed: float, steering: float, duration: float):
        curvature = math.tan(steering) / self.wheelbase
        return _advance_arc(pose, speed * duration, curvature)

    def follow(self, path: RoadPath, s_start: float, speed: float, n_steps: int, dt: float = DT):
        """Drive along ``path`` from arc length ``s_start``; returns ``n_steps + 1`` states.

        Steering switches exactly where the path's curvature changes, so each
        step is integrated piece by piece.
        """
        pose = path.pose(s_start)
        s = s_start
        out = []
        for i in range(n_steps + 1):
            k = path.curvature(s)
            steer = self.steering_for_curvature(k)
            out.append((pose, self.yaw_rate(speed, steer)))
            if i == n_steps:
                break
            remaining = dt
            while remaining > 1e-15:
                if speed == 0:
                    break
                seg = min(remaining, (path.piece_end(s) - s) / speed)
                if seg <= 1e-15:
                    seg = remaining
                steer = self.steering_for_curvature(path.curvature(s))
                pose = self.advance(pose, speed, steer, seg)
                s += speed * seg
                remaining -= seg
        return out


# ---------------------------------------------------------------------------
# scenario generation


@dataclass
class _Road:
    centre: RoadPath  # target lane
    lanes: list[RoadPath]  # all drivable lanes, target direction first
    sidewalks: list[RoadPath]
    drivable: list[np.ndarray]
    sidewalk_polys: list[np.ndarray]
    crosswalks: list[np.ndarray]


def _strip(path: RoadPath, lo: float, hi: float, s0: float, s1: float) -> np.ndarray:
    """Polygon covering lateral offsets [lo, hi] of ``path`` between arc lengths s0 and s1."""
    right = path.polyline(s0, s1, offset=lo)
    left = path.polyline(s0, s1, offset=hi)
    return np.concatenate([right, left[::-1]])


def _crosswalk(path: RoadPath, s: float, lo: float, hi: float) -> np.ndarray:
    return _strip(path, lo, hi, s, s + CROSSWALK_DEPTH)


def _target_route(kind: str, rng: np.random.Generator, speed: float, branch: str):
    """Pieces of the target's route plus the alternative branch for forks."""
    onset = rng.uniform(0.0, max(6.0, 0.5 * FUTURE_STEPS * DT * speed))
    if kind == "straight":
        return [(onset, 0.0)], None
    if kind in ("left_turn", "right_turn"):
        radius = rng.uniform(10.0, 30.0)
        angle = rng.uniform(math.radians(60), math.radians(100))
        sign = 1.0 if kind == "left_turn" else -1.0
        return [(onset, 0.0), (radius * angle, sign / radius)], None
    if kind == "u_turn":
        radius = rng.uniform(8.5, 11.0)
        return [(onset, 0.0), (radius * math.pi, 1.0 / radius)], None
    radius = rng.uniform(20.0, 35.0)
    angle = rng.uniform(math.radians(35), math.radians(55))
    left = [(onset, 0.0), (radius * angle, 1.0 / radius)]
    right = [(onset, 0.0), (radius * angle, -1.0 / radius)]
    return (left, right) if branch == "left" else (right, left)


def _build_road(kind: str, route, alternative, rng: np.random.Generator) -> _Road:
    centre = RoadPath((0.0, 0.0, 0.0), route)
    s0, s1 = -60.0, centre.length + 100.0
    half = LANE_WIDTH / 2
    onset = route[0][0]
    if kind == "fork":
        other = RoadPath((0.0, 0.0, 0.0), alternative)
        left_path, right_path = (centre, other) if route[1][1] > 0 else (other, centre)
        lanes = [centre, other]
        drivable = [_strip(p, -half - 1.0, half + 1.0, s0, s1) for p in lanes]
        sidewalk_polys = [
            _strip(left_path, half + 1.0, half + 1.0 + SIDEWALK_WIDTH, s0, s1),
            _strip(right_path, -half - 1.0 - SIDEWALK_WIDTH, -half - 1.0, s0, s1),
        ]
        sidewalks = [right_path.offset_path(-half - 1.0 - SIDEWALK_WIDTH / 2, s0=s0, s1=s1)]
        crosswalks = [_crosswalk(centre, onset - 8.0, -half - 1.0, half + 1.0)]
        return _Road(centre, lanes, sidewalks, drivable, sidewalk_polys, crosswalks)
    oncoming = centre.offset_path(LANE_WIDTH, reverse=True, s0=s0, s1=s1)
    lanes = [centre, oncoming]
    lo, hi = -half, LANE_WIDTH + half
    drivable = [_strip(centre, lo, hi, s0, s1)]
    sidewalk_polys = [
        _strip(centre, lo - SIDEWALK_WIDTH, lo, s0, s1),
        _strip(centre, hi, hi + SIDEWALK_WIDTH, s0, s1),
    ]
    sidewalks = [centre.offset_path(lo - SIDEWALK_WIDTH / 2, s0=s0, s1=s1)]
    crosswalks = []
    if kind != "straight":
        crosswalks.append(_crosswalk(centre, onset - 6.0, lo, hi))
    elif rng.random() < 0.5:
        crosswalks.append(_crosswalk(centre, rng.uniform(5.0, 40.0), lo, hi))
    return _Road(centre, lanes, sidewalks, drivable, sidewalk_polys, crosswalks)


def _object_info(object_class: str, rng: np.random.Generator) -> ObjectInfo:
    length, width = CLASS_DIMENSIONS[object_class]
    length *= rng.uniform(0.9, 1.1)
    width *= rng.uniform(0.9, 1.1)
    return ObjectInfo(object_class, round(max(length, width), 3), round(min(length, width), 3))


def _states(samples, speed: float, t_first: int, n_valid: int | None = None) -> tuple[AgentState, ...]:
    states = [AgentState(x=p[0], y=p[1], heading=p[2], v=speed, a=0.0, yaw_rate=w, t=t_first + i)
              for i, (p, w) in enumerate(samples)]
    if n_valid is not None and n_valid < len(states):
        first = states[-n_valid]
        pad = len(states) - n_valid
        states = [replace(first, t=states[i].t, valid=False) for i in range(pad)] + states[pad:]
    return tuple(states)


def _add_noise(states: tuple[AgentState, ...], rng: np.random.Generator, std: float) -> tuple[AgentState, ...]:
    # The current state stays exact: it anchors the target frame.
    noise = rng.normal(0.0, std, size=(len(states), 2))
    if std == 0:
        return states
    return tuple(replace(s, x=s.x + dx, y=s.y + dy) if i < len(states) - 1 else s
                 for i, (s, (dx, dy)) in enumerate(zip(states, noise)))


def _arc_length_near(lane: RoadPath, point: np.ndarray) -> float:
    grid = np.arange(0.0, lane.length + 100.0, 0.5)
    pts = lane.polyline(0.0, lane.length + 100.0, step=0.5)[: len(grid)]
    return float(grid[int(np.argmin(np.linalg.norm(pts - point, axis=1)))])


def _neighbor(road: _Road, rng: np.random.Generator) -> tuple[ObjectInfo, RoadPath, float, float]:
    object_class = str(rng.choice(OBJECT_CLASSES[:6], p=[0.5, 0.1, 0.1, 0.1, 0.1, 0.1]))
    info = _object_info(object_class, rng)
    if object_class == "pedestrian":
        lane = road.sidewalks[int(rng.integers(len(road.sidewalks)))]
        speed = rng.uniform(0.8, 1.8)
    else:
        lane = road.lanes[int(rng.integers(len(road.lanes)))]
        speed = rng.uniform(3.0, 6.0) if object_class == "bicycle" else rng.uniform(2.0, 12.0)
    # Place the neighbour abreast of a point on the target lane, clear of the target itself.
    u = rng.uniform(-25.0, 60.0)
    if abs(u) < 8.0:
        u += 16.0
    x, y, _ = road.centre.pose(u)
    if lane is road.centre:
        s_now = u
    else:
        s_now = _arc_length_near(lane, np.array([x, y]))
    return info, lane, s_now, speed


def generate_scenario(spec: ScenarioSpec) -> Sample:
    """Roll out one scenario; identical specs give bit-identical samples."""
    rng = np.random.default_rng([spec.seed, 0])
    branch = spec.branch
    if branch is None:
        branch = "left" if np.random.default_rng([spec.seed, 1]).random() < 0.5 else "right"
    speed = float(spec.target_speed)
    route, alternative = _target_route(spec.kind, rng, speed, branch)
    road = _build_road(spec.kind, route, alternative, rng)

    target_class = str(rng.choice(["car", "truck", "bus"], p=[0.7, 0.15, 0.15]))
    target_info = _object_info(target_class, rng)
    bicycle = KinematicBicycle(wheelbase=0.6 * target_info.length)
    history_len = HISTORY_STEPS * DT * speed
    rollout = bicycle.follow(road.centre, -history_len, speed, HISTORY_STEPS + FUTURE_STEPS)
    past = _states(rollout[:HISTORY_STEPS + 1], speed, t_first=-HISTORY_STEPS)
    future = np.array([[p[0], p[1]] for p, _ in rollout[HISTORY_STEPS + 1:]])

    neighbors = []
    for i in range(spec.n_neighbors):
        info, lane, s_now, nspeed = _neighbor(road, rng)
        nbike = KinematicBicycle(wheelbase=0.6 * info.length)
        n_valid = int(rng.integers(1, HISTORY_STEPS + 1)) if rng.random() < 0.2 else None
        traj = nbike.follow(lane, s_now - HISTORY_STEPS * DT * nspeed, nspeed, HISTORY_STEPS)
        states = _states(traj, nspeed, t_first=-HISTORY_STEPS, n_valid=n_valid)
        neighbors.append(AgentTrack(f"agent-{i + 1}", info, states))

    target = AgentTrack("agent-0", target_info, _add_noise(past, rng, spec.noise_std))
    neighbors = [replace(n, states=_add_noise(n.states, rng, spec.noise_std)) for n in neighbors]
    lane_lines = [road.centre.polyline(-60.0, road.centre.length + 100.0)]
    lane_lines += [lane.polyline(0.0, lane.length + 100.0) for lane in road.lanes[1:]]
    vmap = VectorMap(
        drivable_polygons=road.drivable,
        lane_centerlines=lane_lines,
        crosswalks=road.crosswalks,
        sidewalks=road.sidewalk_polys,
    )
    return Sample(f"{spec.kind}-{spec.seed}", target, neighbors, vmap, future)


def generate_dataset(n: int, seed: int, kinds: Sequence[str] = SCENARIO_KINDS,
                     max_neighbors: int = 6, noise_std: float = 0.05) -> list[Sample]:
    """Draw ``n`` scenario specs from a master seed and roll each out."""
    rng = np.random.default_rng(seed)
    speed_range = {"straight": (2.0, 14.0), "left_turn": (4.0, 10.0), "right_turn": (4.0, 10.0),
                   "u_turn": (3.0, 6.0), "fork": (5.0, 12.0)}
    samples = []
    for _ in range(n):
        kind = str(rng.choice(list(kinds)))
        lo, hi = speed_range[kind]
        spec = ScenarioSpec(kind=kind, target_speed=float(rng.uniform(lo, hi)),
                            n_neighbors=int(rng.integers(0, max_neighbors + 1)),
                            noise_std=noise_std, seed=int(rng.integers(2**63)))
        samples.append(generate_scenario(spec))
    return samples


# ---------------------------------------------------------------------------
# interchange format


def _state_record(s: AgentState) -> dict:
    rec = {"x": s.x, "y": s.y, "heading": s.heading, "v": s.v, "a": s.a, "yaw_rate": s.yaw_rate, "t": s.t}
    if not s.valid:
        rec["valid"] = False
    return rec


def _track_record(track: AgentTrack) -> dict:
    return {
        "agent_id": track.agent_id,
        "info": {"class": track.info.object_class, "length": track.info.length, "width": track.info.width},
        "states": [_state_record(s) for s in track.states],
    }


def sample_to_record(sample: Sample) -> dict:
    return {
        "sample_id": sample.sample_id,
        "target": _track_record(sample.target),
        "neighbors": [_track_record(n) for n in sample.neighbors],
        "map": {name: [np.asarray(a, dtype=float).tolist() for a in arrays]
                for name, arrays in sample.map.layers()},
        "future": np.asarray(sample.future, dtype=float).tolist(),
    }


def write_samples(samples: Iterable[Sample], path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_record(sample), allow_nan=False))
            fh.write("\n")
            count += 1
    return count


def _number(rec: dict, key: str, index: int, where: str) -> float:
    try:
        value = rec[key]
    except (KeyError, TypeError):
        raise InterchangeError(index, f"{where}.{key}", "missing") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InterchangeError(index, f"{where}.{key}", f"expected a number, got {value!r}")
    return float(value)


def _parse_track(rec, index: int, where: str, pad: bool) -> AgentTrack:
    if not isinstance(rec, dict):
        raise InterchangeError(index, where, "expected an object")
    info = rec.get("info")
    if not isinstance(info, dict) or not isinstance(info.get("class"), str):
        raise InterchangeError(index, f"{where}.info", "expected {class, length, width}")
    obj = ObjectInfo(info["class"], _number(info, "length", index, f"{where}.info"),
                     _number(info, "width", index, f"{where}.info"))
    raw_states = rec.get("states")
    if not isinstance(raw_states, list) or not raw_states:
        raise InterchangeError(index, f"{where}.states", "expected a non-empty list")
    states = []
    for j, s in enumerate(raw_states):
        w = f"{where}.states[{j}]"
        if not isinstance(s, dict):
            raise InterchangeError(index, w, "expected an object")
        t = s.get("t")
        if not isinstance(t, int) or isinstance(t, bool):
            raise InterchangeError(index, f"{w}.t", "expected an integer timestep")
        states.append(AgentState(
            x=_number(s, "x", index, w), y=_number(s, "y", index, w),
            heading=_number(s, "heading", index, w), v=_number(s, "v", index, w),
            a=_number(s, "a", index, w), yaw_rate=_number(s, "yaw_rate", index, w),
            t=t, valid=bool(s.get("valid", True))))
    expected = HISTORY_STEPS + 1
    if len(states) > expected or (len(states) < expected and not pad):
        raise InterchangeError(index, f"{where}.states", f"expected {expected} states, got {len(states)}")
    if len(states) < expected:
        first = states[0]
        missing = expected - len(states)
        states = [replace(first, t=first.t - missing + i, valid=False) for i in range(missing)] + states
    return AgentTrack(str(rec.get("agent_id", where)), obj, tuple(states))


def _parse_points(value, index: int, field: str, min_len: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InterchangeError(index, field, "expected an array of [x, y] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < min_len:
        raise InterchangeError(index, field, f"expected at least {min_len} [x, y] pairs")
    return arr


def record_to_sample(rec, index: int = 0) -> Sample:
    if not isinstance(rec, dict):
        raise InterchangeError(index, "<record>", "expected an object")
    if not isinstance(rec.get("sample_id"), str):
        raise InterchangeError(index, "sample_id", "expected a string")
    target = _parse_track(rec.get("target"), index, "target", pad=False)
    neighbors_raw = rec.get("neighbors", [])
    if not isinstance(neighbors_raw, list):
        raise InterchangeError(index, "neighbors", "expected a list")
    neighbors = [_parse_track(n, index, f"neighbors[{i}]", pad=True) for i, n in enumerate(neighbors_raw)]
    raw_map = rec.get("map")
    if not isinstance(raw_map, dict):
        raise InterchangeError(index, "map", "expected an object")
    layers = {}
    for name in VectorMap.LAYERS:
        min_len = 2 if name == "lane_centerlines" else 3
        items = raw_map.get(name, [])
        if not isinstance(items, list):
            raise InterchangeError(index, f"map.{name}", "expected a list")
        layers[name] = [_parse_points(a, index, f"map.{name}[{i}]", min_len) for i, a in enumerate(items)]
    future = _parse_points(rec.get("future"), index, "future", FUTURE_STEPS)
    if len(future) != FUTURE_STEPS:
        raise InterchangeError(index, "future", f"expected {FUTURE_STEPS} waypoints, got {len(future)}")
    return Sample(rec["sample_id"], target, neighbors, VectorMap(**layers), future)


def read_samples(path, normalize: bool = True) -> list[Sample]:
    """Read an interchange file; ``normalize=False`` skips the target-frame transform (raw round-trip)."""
    from .scene import to_target_frame

    samples = []
    with open(path, encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InterchangeError(index, "<record>", f"malformed JSON ({exc.msg})") from None
            sample = record_to_sample(rec, index)
            samples.append(to_target_frame(sample) if normalize else sample)
    return samples


# ---------------------------------------------------------------------------
# splits


def split_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of ``n`` items; ties go to the earlier slot."""
    ratios = [float(r) for r in ratios]
    if not ratios or any(not (r > 0) for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be positive and sum to 1, got {ratios}")
    quotas = [n * r for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def make_split(sample_ids: Sequence[str], ratios: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0) -> DatasetSplit:
    if len(ratios) != 3:
        raise ValueError("ratios must be (train, val, test)")
    sizes = split_sizes(len(sample_ids), ratios)
    order = np.random.default_rng(seed).permutation(len(sample_ids))
    ids = [sample_ids[i] for i in order]
    a, b = sizes[0], sizes[0] + sizes[1]
    return DatasetSplit(tuple(ids[:a]), tuple(ids[a:b]), tuple(ids[b:]), seed)
