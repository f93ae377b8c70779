"""Oriented-box and planar-pose math on the ground plane.

Boxes are 7-DoF (3D center, 3D extent, yaw about the vertical axis); robot
poses live in SE(2). Everything here is a pure function on immutable values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ConfigurationError, InvalidInputError, UndefinedMeanError

TWO_PI = 2.0 * math.pi

# Clipped footprint polygons below this area count as no intersection.
DEGENERATE_AREA = 1e-12


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    if -math.pi < angle <= math.pi:
        return angle
    a = (angle + math.pi) % TWO_PI - math.pi
    return math.pi if a == -math.pi else a


def yaw_difference(a: float, b: float) -> float:
    """Smallest absolute angular difference between two yaws, in [0, pi]."""
    d = math.fmod(abs(a - b), TWO_PI)
    return TWO_PI - d if d > math.pi else d


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} contains a non-finite value: {v!r}")


@dataclass(frozen=True)
class PlanarPose:
    """Robot pose on the ground plane: position, heading, stream timestamp."""

    x: float
    y: float
    heading: float
    timestamp: float = 0.0

    def __post_init__(self):
        _require_finite("PlanarPose", self.x, self.y, self.heading, self.timestamp)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))
        object.__setattr__(self, "timestamp", float(self.timestamp))


IDENTITY_POSE = PlanarPose(0.0, 0.0, 0.0)


def compose(a: PlanarPose, b: PlanarPose) -> PlanarPose:
    """Pose of frame b expressed through frame a (a then b)."""
    c, s = math.cos(a.heading), math.sin(a.heading)
    return PlanarPose(
        a.x + c * b.x - s * b.y,
        a.y + s * b.x + c * b.y,
        a.heading + b.heading,
        timestamp=a.timestamp,
    )


def invert(p: PlanarPose) -> PlanarPose:
    """Inverse SE(2) transform of p."""
    c, s = math.cos(p.heading), math.sin(p.heading)
    return PlanarPose(-(c * p.x + s * p.y), s * p.x - c * p.y, -p.heading, timestamp=p.timestamp)


@dataclass(frozen=True)
class OrientedBox:
    """7-DoF box hypothesis: center (m), extent (length, width, height, m), yaw."""

    center: tuple[float, float, float]
    extent: tuple[float, float, float]
    yaw: float
    class_id: str
    confidence: float = 1.0

    def __post_init__(self):
        center = tuple(float(v) for v in self.center)
        extent = tuple(float(v) for v in self.extent)
        if len(center) != 3 or len(extent) != 3:
            raise InvalidInputError("center and extent must be 3-vectors")
        _require_finite("OrientedBox", *center, *extent, self.yaw, self.confidence)
        if min(extent) <= 0.0:
            raise InvalidInputError(f"extent components must be strictly positive, got {extent}")
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidInputError(f"confidence must lie in [0, 1], got {self.confidence}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))
        object.__setattr__(self, "confidence", float(self.confidence))

    @property
    def volume(self) -> float:
        l, w, h = self.extent
        return l * w * h


def transform_box(pose: PlanarPose, box: OrientedBox) -> OrientedBox:
    """Apply a planar rigid transform to a box; z and extent pass through."""
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    x, y, z = box.center
    return replace(
        box,
        center=(pose.x + c * x - s * y, pose.y + s * x + c * y, z),
        yaw=wrap_angle(box.yaw + pose.heading),
    )


def transform_to_map(
    box: OrientedBox, robot: PlanarPose, sensor_offset: PlanarPose = IDENTITY_POSE
) -> OrientedBox:
    """Express a sensor-frame box in the map frame given the robot pose."""
    return transform_box(compose(robot, sensor_offset), box)


def transform_to_sensor(
    box: OrientedBox, robot: PlanarPose, sensor_offset: PlanarPose = IDENTITY_POSE
) -> OrientedBox:
    """Express a map-frame box in the robot's sensor frame."""
    return transform_box(invert(compose(robot, sensor_offset)), box)


def center_distance(a: OrientedBox, b: OrientedBox) -> float:
    """Euclidean distance between box centers in 3D."""
    return math.dist(a.center, b.center)


def footprint_corners(box: OrientedBox) -> list[tuple[float, float]]:
    """BEV footprint rectangle corners in counter-clockwise order."""
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    hl, hw = box.extent[0] / 2.0, box.extent[1] / 2.0
    cx, cy = box.center[0], box.center[1]
    return [
        (cx + c * dx - s * dy, cy + s * dx + c * dy)
        for dx, dy in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
    ]


def _polygon_area(pts: Sequence[tuple[float, float]]) -> float:
    if len(pts) < 3:
        return 0.0
    acc = 0.0
    for i in range(len(pts)):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % len(pts)]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2.0


def _clip_polygon(
    subject: list[tuple[float, float]], clip: list[tuple[float, float]]
) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of `subject` against convex CCW polygon `clip`."""
    output = subject
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inputs = output
        output = []
        sides = [ex * (py - ay) - ey * (px - ax) for px, py in inputs]
        for j in range(len(inputs)):
            p1, s1 = inputs[j], sides[j]
            p2, s2 = inputs[(j + 1) % len(inputs)], sides[(j + 1) % len(inputs)]
            if s1 >= 0.0:
                output.append(p1)
                if s2 < 0.0:
                    t = s1 / (s1 - s2)
                    output.append((p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1])))
            elif s2 >= 0.0:
                t = s1 / (s1 - s2)
                output.append((p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1])))
    return output


def footprint_intersection_area(a: OrientedBox, b: OrientedBox) -> float:
    """Area of the intersection of the two BEV footprint rectangles."""
    poly = _clip_polygon(footprint_corners(a), footprint_corners(b))
    area = _polygon_area(poly)
    return area if area >= DEGENERATE_AREA else 0.0


def iou_3d(a: OrientedBox, b: OrientedBox) -> float:
    """Volumetric intersection-over-union of two yaw-oriented boxes.

    Intersection is the clipped-footprint area times the vertical interval
    overlap; result is clamped to [0, 1] against float round-off.
    """
    z_lo = max(a.center[2] - a.extent[2] / 2.0, b.center[2] - b.extent[2] / 2.0)
    z_hi = min(a.center[2] + a.extent[2] / 2.0, b.center[2] + b.extent[2] / 2.0)
    dz = z_hi - z_lo
    if dz <= 0.0:
        return 0.0
    inter = footprint_intersection_area(a, b) * dz
    if inter <= 0.0:
        return 0.0
    union = a.volume + b.volume - inter
    return min(1.0, max(0.0, inter / union))


@dataclass(frozen=True)
class ClassSpec:
    """Per-class geometry: nominal extent and footprint symmetry plane count."""

    class_id: str
    nominal_extent: tuple[float, float, float]
    symmetry_planes: int = 0

    def __post_init__(self):
        extent = tuple(float(v) for v in self.nominal_extent)
        if len(extent) != 3 or min(extent) <= 0.0:
            raise ConfigurationError(f"nominal_extent must be 3 positive values, got {extent}")
        if self.symmetry_planes not in (0, 1, 2):
            raise ConfigurationError(
                f"symmetry_planes must be 0, 1 or 2, got {self.symmetry_planes}"
            )
        object.__setattr__(self, "nominal_extent", extent)

    @property
    def hypothesis_count(self) -> int:
        return {0: 1, 1: 2, 2: 4}[self.symmetry_planes]


def symmetry_hypotheses(yaw: float, spec: ClassSpec) -> list[float]:
    """All yaws indistinguishable from `yaw` under the class's footprint symmetry.

    0 planes: just the input; 1 plane: half-turn pair; 2 orthogonal planes:
    quarter-turn quadruple. All outputs wrapped to (-pi, pi].
    """
    k = spec.hypothesis_count
    step = TWO_PI / k
    return [wrap_angle(yaw + j * step) for j in range(k)]


def resolve_symmetric_yaw(yaw: float, reference: float, spec: ClassSpec) -> tuple[float, int]:
    """Pick the symmetry hypothesis of `yaw` closest to `reference`.

    Returns (resolved yaw, hypothesis index); index 0 means the raw yaw
    already was the closest hypothesis.
    """
    hyps = symmetry_hypotheses(yaw, spec)
    best = min(range(len(hyps)), key=lambda j: yaw_difference(hyps[j], reference))
    return hyps[best], best


def circular_mean(angles: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """Circular mean of angles via the resultant vector, wrapped to (-pi, pi].

    Raises UndefinedMeanError when the resultant magnitude collapses
    (antipodal cancellation leaves no meaningful direction).
    """
    if len(angles) == 0:
        raise InvalidInputError("circular_mean of an empty angle list")
    if weights is None:
        weights = [1.0] * len(angles)
    if len(weights) != len(angles):
        raise InvalidInputError("weights must match angles in length")
    total = float(sum(weights))
    if total <= 0.0:
        raise InvalidInputError("weights must have a positive sum")
    s = sum(w * math.sin(a) for a, w in zip(angles, weights))
    c = sum(w * math.cos(a) for a, w in zip(angles, weights))
    if math.hypot(s, c) / total < 1e-9:
        raise UndefinedMeanError("angles cancel antipodally; mean direction undefined")
    return wrap_angle(math.atan2(s, c))
