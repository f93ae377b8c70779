"""Greedy center-distance association of detections to tracklets.

Candidate pairs are class-gated, sorted by (distance, tracklet id, detection
index) and accepted greedily while both endpoints are free and the distance
stays inside a size-based gate. Deliberately feature-free: centers and
extents are all it looks at.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InvalidInputError
from .geometry import OrientedBox, center_distance


@dataclass(frozen=True)
class AssociationResult:
    matches: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)
    unmatched_tracklets: list[int] = field(default_factory=list)


def gate_threshold(det: OrientedBox, track_box: OrientedBox, scale: float = 1.0) -> float:
    """Match gate in meters: half the larger of the two footprint diagonals.

    A same-object center cannot plausibly move further than this between
    frames, so anything beyond it is treated as a different object.
    """
    da = math.hypot(det.extent[0], det.extent[1])
    db = math.hypot(track_box.extent[0], track_box.extent[1])
    return 0.5 * max(da, db) * scale


def associate(
    detections: Sequence[OrientedBox],
    tracklets: Sequence[tuple[int, OrientedBox]],
    gate_scale: float = 1.0,
) -> AssociationResult:
    """One-to-one greedy matching of detections to predicted tracklet boxes."""
    seen_ids = set()
    for tid, _ in tracklets:
        if tid in seen_ids:
            raise InvalidInputError(f"duplicate tracklet id {tid}")
        seen_ids.add(tid)

    candidates = []
    for tid, tbox in tracklets:
        for di, det in enumerate(detections):
            if det.class_id != tbox.class_id:
                continue
            dist = center_distance(det, tbox)
            if dist <= gate_threshold(det, tbox, gate_scale):
                candidates.append((dist, tid, di))
    candidates.sort()

    matched_t: set[int] = set()
    matched_d: set[int] = set()
    matches = []
    for dist, tid, di in candidates:
        if tid in matched_t or di in matched_d:
            continue
        matched_t.add(tid)
        matched_d.add(di)
        matches.append((tid, di, dist))

    return AssociationResult(
        matches=matches,
        unmatched_detections=[i for i in range(len(detections)) if i not in matched_d],
        unmatched_tracklets=[tid for tid, _ in tracklets if tid not in matched_t],
    )
