"""Tracklet lifecycle engine.

Pipeline per frame: transform detections to the map frame, associate them to
existing tracklets, stabilize matched tracklets (orientation resolution plus
position/orientation averaging while stationary), spawn tentative tracklets
for the leftovers, then confirm/prune and export a snapshot.

Orientation handling for symmetric classes: each incoming yaw is snapped to
the symmetry hypothesis nearest the tracklet's current estimate, and the raw
hypothesis votes feed a sequential count. A tracklet only publishes once one
hypothesis leads the runner-up by `orientation_commit_margin` votes, which is
what keeps occasional detector flips (and even a flipped *first* detection)
out of the published stream.
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .association import associate, gate_threshold
from .classes import DEFAULT_CLASS_SPECS
from .errors import ConfigurationError, InternalStateError, StreamOrderError, UndefinedMeanError
from .geometry import (
    TWO_PI,
    ClassSpec,
    IDENTITY_POSE,
    OrientedBox,
    PlanarPose,
    center_distance,
    circular_mean,
    resolve_symmetric_yaw,
    transform_to_map,
    wrap_angle,
    yaw_difference,
)

DEG = 0.017453292519943295


class Lifecycle(enum.Enum):
    TENTATIVE = "Tentative"
    CONFIRMED = "Confirmed"
    LOST = "Lost"


class MotionState(enum.Enum):
    STATIONARY = "Stationary"
    MOVING = "Moving"


@dataclass(frozen=True)
class TrackerConfig:
    move_pos_threshold: float = 0.05
    move_yaw_threshold: float = 2.5 * DEG
    motion_min_history: int = 19
    confirm_count: int = 3
    confirm_window: float = 2.0
    history_capacity: int = 20
    orientation_window: int = 8
    prune_tentative: float = 3.0
    prune_confirmed: float = 5.0
    stationary_reentry_frames: int = 5
    orientation_outlier_threshold: float = 45.0 * DEG
    orientation_outlier_frames: int = 3
    orientation_commit_margin: int = 8
    gate_scale: float = 1.0
    duplicate_merge_scale: float = 1.0

    def __post_init__(self):
        for name in (
            "move_pos_threshold",
            "move_yaw_threshold",
            "motion_min_history",
            "confirm_window",
            "history_capacity",
            "orientation_window",
            "prune_tentative",
            "prune_confirmed",
            "stationary_reentry_frames",
            "orientation_outlier_threshold",
            "orientation_outlier_frames",
            "orientation_commit_margin",
            "gate_scale",
            "duplicate_merge_scale",
        ):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be strictly positive")
        if self.confirm_count < 1:
            raise ConfigurationError("confirm_count must be >= 1")


def detect_motion(prev: OrientedBox, curr: OrientedBox, config: TrackerConfig) -> MotionState:
    """Moving iff the positional or rotational step between consecutive poses
    exceeds its threshold."""
    if center_distance(prev, curr) > config.move_pos_threshold:
        return MotionState.MOVING
    if yaw_difference(prev.yaw, curr.yaw) > config.move_yaw_threshold:
        return MotionState.MOVING
    return MotionState.STATIONARY


class Tracklet:
    """One tracked object: identity, bounded observation history, lifecycle."""

    def __init__(self, tid: int, obs: OrientedBox, t: float, spec: ClassSpec, config: TrackerConfig):
        self.id = tid
        self.class_id = obs.class_id
        self.history: deque[tuple[float, OrientedBox]] = deque(maxlen=config.history_capacity)
        self.history.append((t, obs))
        # orientation keeps its own, shorter window: rotation must track faster
        # than position averaging smooths
        self.resolved_yaws: deque[float] = deque(maxlen=config.orientation_window)
        self.resolved_yaws.append(obs.yaw)
        self.lifecycle = Lifecycle.TENTATIVE
        self.motion_state = MotionState.STATIONARY
        self.output_pose = obs
        self.match_timestamps = [t]
        self.miss_count = 0
        self.hyp_counts = [0] * spec.hypothesis_count
        self.hyp_counts[0] = 1
        # a class without symmetry needs no disambiguation
        self.oriented = spec.hypothesis_count == 1
        self.quiet_streak = 0
        self.outlier_streak = 0
        self._predicted = obs

    @property
    def last_match_time(self) -> float:
        return self.match_timestamps[-1]

    @staticmethod
    def _yaw_estimate(yaws) -> float:
        yaws = list(yaws)
        try:
            return circular_mean(yaws)
        except UndefinedMeanError:
            return yaws[-1]

    def _mean_center(self) -> tuple[float, float, float]:
        if not self.history:
            raise InternalStateError(f"tracklet {self.id} has an empty history")
        n = len(self.history)
        sx = sy = sz = 0.0
        for _, b in self.history:
            sx += b.center[0]
            sy += b.center[1]
            sz += b.center[2]
        return sx / n, sy / n, sz / n

    def _mean_pose(self) -> OrientedBox:
        """Published stationary pose: averaged center, short-window yaw."""
        latest = self.history[-1][1]
        return replace(
            latest, center=self._mean_center(), yaw=self._yaw_estimate(self.resolved_yaws)
        )

    def predicted_pose(self) -> OrientedBox:
        """Smoothed full-window pose: the association anchor and the pose fed
        to the motion predicate. Robust to single-frame outliers, unlike the
        published output in the Moving state. Cached; refreshed on update."""
        return self._predicted

    def _compute_predicted(self) -> OrientedBox:
        latest = self.history[-1][1]
        return replace(
            latest,
            center=self._mean_center(),
            yaw=self._yaw_estimate(b.yaw for _, b in self.history),
        )

    def _rotate_orientation(self, delta: float) -> None:
        """Shift every stored yaw by delta (hypothesis re-commit)."""
        self.resolved_yaws = deque(
            (wrap_angle(y + delta) for y in self.resolved_yaws), maxlen=self.resolved_yaws.maxlen
        )
        self.history = deque(
            ((t, replace(b, yaw=wrap_angle(b.yaw + delta))) for t, b in self.history),
            maxlen=self.history.maxlen,
        )
        self.output_pose = replace(self.output_pose, yaw=wrap_angle(self.output_pose.yaw + delta))
        self._predicted = replace(self._predicted, yaw=wrap_angle(self._predicted.yaw + delta))

    def _vote_orientation(self, obs: OrientedBox, spec: ClassSpec, config: TrackerConfig) -> None:
        _, j = resolve_symmetric_yaw(obs.yaw, self.output_pose.yaw, spec)
        self.hyp_counts[j] += 1
        ranked = sorted(self.hyp_counts, reverse=True)
        runner_up = ranked[1] if len(ranked) > 1 else 0
        if ranked[0] - runner_up >= config.orientation_commit_margin:
            winner = self.hyp_counts.index(ranked[0])
            if winner != 0:
                # stored yaws live on the first observation's hypothesis;
                # the majority says the true one is `winner` steps away
                self._rotate_orientation(-winner * TWO_PI / spec.hypothesis_count)
            self.oriented = True

    def update(self, obs: OrientedBox, t: float, spec: ClassSpec, config: TrackerConfig) -> None:
        """Fold a matched observation into the tracklet and refresh its output."""
        self.miss_count = 0
        self.match_timestamps.append(t)

        if not self.oriented:
            self._vote_orientation(obs, spec, config)
        resolved_yaw, _ = resolve_symmetric_yaw(obs.yaw, self.output_pose.yaw, spec)
        resolved = replace(obs, yaw=resolved_yaw)

        if self.resolved_yaws and yaw_difference(
            resolved_yaw, self._yaw_estimate(self.resolved_yaws)
        ) > config.orientation_outlier_threshold:
            self.outlier_streak += 1
        else:
            self.outlier_streak = 0

        old_motion = self._predicted
        self.history.append((t, resolved))
        self.resolved_yaws.append(resolved_yaw)

        if self.outlier_streak >= config.orientation_outlier_frames:
            # sustained disagreement means the object genuinely reoriented:
            # keep only the observations that describe the new orientation
            recent = list(self.resolved_yaws)[-config.orientation_outlier_frames :]
            self.resolved_yaws.clear()
            self.resolved_yaws.extend(recent)
            self.outlier_streak = 0

        self._predicted = self._compute_predicted()

        # consecutive smoothed poses feed the threshold test; below
        # motion_min_history samples the mean estimate is too noisy to trust
        warmup = min(config.motion_min_history, config.history_capacity - 1)
        if len(self.history) > warmup:
            verdict = detect_motion(old_motion, self._predicted, config)
            if verdict is MotionState.MOVING:
                self.motion_state = MotionState.MOVING
                self.quiet_streak = 0
            elif self.motion_state is MotionState.MOVING:
                self.quiet_streak += 1
                if self.quiet_streak >= config.stationary_reentry_frames:
                    self.motion_state = MotionState.STATIONARY
                    self.quiet_streak = 0

        if self.motion_state is MotionState.MOVING:
            self.output_pose = resolved
        else:
            self.output_pose = self._mean_pose()

    def mark_missed(self) -> None:
        self.miss_count += 1

    def confirmation_due(self, config: TrackerConfig) -> bool:
        ts = self.match_timestamps
        c = config.confirm_count
        return any(ts[i + c - 1] - ts[i] <= config.confirm_window for i in range(len(ts) - c + 1))


@dataclass(frozen=True)
class SnapshotEntry:
    id: int
    class_id: str
    lifecycle: Lifecycle
    motion_state: MotionState
    output_pose: OrientedBox
    oriented: bool


@dataclass(frozen=True)
class TrackerSnapshot:
    timestamp: float
    entries: tuple[SnapshotEntry, ...]

    def published(self) -> tuple[SnapshotEntry, ...]:
        """Entries ready for downstream consumers: confirmed and oriented."""
        return tuple(
            e for e in self.entries if e.lifecycle is Lifecycle.CONFIRMED and e.oriented
        )


class Tracker:
    """Single-owner stateful tracker; ingest frames strictly in time order."""

    def __init__(
        self,
        config: TrackerConfig | None = None,
        class_specs: Mapping[str, ClassSpec] | None = None,
        sensor_offset: PlanarPose = IDENTITY_POSE,
    ):
        self.config = config or TrackerConfig()
        self.class_specs = dict(class_specs) if class_specs is not None else dict(DEFAULT_CLASS_SPECS)
        self.sensor_offset = sensor_offset
        self.registry: dict[int, Tracklet] = {}
        self.archive: list[Tracklet] = []
        self._ids = itertools.count(1)
        self._last_t: float | None = None

    def _spec_for(self, class_id: str) -> ClassSpec:
        try:
            return self.class_specs[class_id]
        except KeyError:
            raise ConfigurationError(f"unknown object class {class_id!r}") from None

    def ingest_frame(self, t: float, robot: PlanarPose, boxes: Sequence[OrientedBox]) -> TrackerSnapshot:
        """Process one detection frame (boxes in the sensor frame) and return
        the post-update snapshot."""
        if self._last_t is not None and t <= self._last_t:
            raise StreamOrderError(f"frame at t={t} after t={self._last_t}")
        self._last_t = t

        det_map = [transform_to_map(b, robot, self.sensor_offset) for b in boxes]
        for det in det_map:
            self._spec_for(det.class_id)

        result = associate(
            det_map,
            [(tid, trk.predicted_pose()) for tid, trk in self.registry.items()],
            self.config.gate_scale,
        )
        for tid, di, _ in result.matches:
            trk = self.registry[tid]
            trk.update(det_map[di], t, self._spec_for(trk.class_id), self.config)
        for tid in result.unmatched_tracklets:
            self.registry[tid].mark_missed()
        for di in result.unmatched_detections:
            obs = det_map[di]
            tid = next(self._ids)
            self.registry[tid] = Tracklet(tid, obs, t, self._spec_for(obs.class_id), self.config)

        self.manage(t)
        return self.snapshot(t)

    def _drop(self, tid: int) -> None:
        trk = self.registry.pop(tid)
        trk.lifecycle = Lifecycle.LOST
        self.archive.append(trk)

    def _suppress_duplicates(self) -> None:
        """A gate miss on a noisy frame can seed a second tracklet on top of an
        existing one. Two same-class tracklets closer than the association
        gate cannot be distinct physical objects, so keep the better-supported
        one."""
        alive = sorted(self.registry.values(), key=lambda trk: trk.id)
        doomed: set[int] = set()
        for i, a in enumerate(alive):
            for b in alive[i + 1 :]:
                if a.id in doomed or b.id in doomed or a.class_id != b.class_id:
                    continue
                pa, pb = a.predicted_pose(), b.predicted_pose()
                gate = gate_threshold(pa, pb, self.config.duplicate_merge_scale)
                if center_distance(pa, pb) <= gate:
                    victim = a if len(a.match_timestamps) < len(b.match_timestamps) else b
                    doomed.add(victim.id)
        for tid in doomed:
            self._drop(tid)

    def manage(self, now: float) -> None:
        """Suppress duplicates, confirm tentative tracklets with dense-enough
        matches, and prune stale ones."""
        cfg = self.config
        self._suppress_duplicates()
        for tid in list(self.registry):
            trk = self.registry[tid]
            if trk.lifecycle is Lifecycle.TENTATIVE and trk.confirmation_due(cfg):
                trk.lifecycle = Lifecycle.CONFIRMED
            if now - trk.last_match_time > (
                cfg.prune_confirmed if trk.lifecycle is Lifecycle.CONFIRMED else cfg.prune_tentative
            ):
                self._drop(tid)

    def snapshot(self, now: float, confirmed_only: bool = False) -> TrackerSnapshot:
        entries = tuple(
            SnapshotEntry(
                trk.id, trk.class_id, trk.lifecycle, trk.motion_state, trk.output_pose, trk.oriented
            )
            for trk in sorted(self.registry.values(), key=lambda trk: trk.id)
        )
        snap = TrackerSnapshot(now, entries)
        if confirmed_only:
            return TrackerSnapshot(now, snap.published())
        return snap
