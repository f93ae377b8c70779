"""Evaluation suite: per-frame optimal matching, DetA, HOTA, IoU and RMSE.

A prediction counts as a true positive when it overlaps a same-class ground
truth box with IoU above the threshold (0.5 by default). Per-frame matching
maximizes the TP count first and total IoU second. Average IoU is computed
threshold-free and normalized by the ground-truth box count, so both misses
and bad localization pull it down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AlignmentError, InvalidInputError, UndefinedMetricError
from .geometry import OrientedBox, center_distance, iou_3d, yaw_difference
from .streams import FrameRecord

# Dominates any achievable IoU total, so assignment maximizes pair count first.
_CARDINALITY_BONUS = 1000.0

ALPHA_SWEEP = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class FramePairing:
    """Matching outcome for one frame at a fixed IoU threshold."""

    timestamp: float
    tp_pairs: tuple[tuple[int, int, float], ...]
    fp_indices: tuple[int, ...]
    fn_indices: tuple[int, ...]

    @property
    def tp(self) -> int:
        return len(self.tp_pairs)

    @property
    def fp(self) -> int:
        return len(self.fp_indices)

    @property
    def fn(self) -> int:
        return len(self.fn_indices)


def match_frame(
    gt: Sequence[OrientedBox],
    pred: Sequence[OrientedBox],
    alpha: float = 0.5,
    timestamp: float = 0.0,
) -> FramePairing:
    """Maximum-cardinality, then maximum-total-IoU one-to-one matching of
    same-class pairs with IoU strictly above `alpha`."""
    n_gt, n_pred = len(gt), len(pred)
    pairs: list[tuple[int, int, float]] = []
    if n_gt and n_pred:
        score = np.zeros((n_gt, n_pred))
        iou = np.zeros((n_gt, n_pred))
        feasible = np.zeros((n_gt, n_pred), dtype=bool)
        for i, g in enumerate(gt):
            for j, p in enumerate(pred):
                if g.class_id != p.class_id:
                    continue
                v = iou_3d(g, p)
                if v > alpha:
                    iou[i, j] = v
                    feasible[i, j] = True
                    score[i, j] = v + _CARDINALITY_BONUS
        rows, cols = linear_sum_assignment(score, maximize=True)
        for i, j in zip(rows, cols):
            if feasible[i, j]:
                pairs.append((int(i), int(j), float(iou[i, j])))
    pairs.sort()
    matched_gt = {i for i, _, _ in pairs}
    matched_pred = {j for _, j, _ in pairs}
    return FramePairing(
        timestamp=timestamp,
        tp_pairs=tuple(pairs),
        fp_indices=tuple(j for j in range(n_pred) if j not in matched_pred),
        fn_indices=tuple(i for i in range(n_gt) if i not in matched_gt),
    )


def det_a(pairings: Iterable[FramePairing]) -> float:
    """Detection accuracy: TP / (TP + FP + FN) aggregated over all frames."""
    tp = fp = fn = 0
    for p in pairings:
        tp += p.tp
        fp += p.fp
        fn += p.fn
    denom = tp + fp + fn
    if denom == 0:
        raise UndefinedMetricError("no ground truth and no predictions anywhere")
    return tp / denom


def pos_rmse(pairs: Iterable[tuple[OrientedBox, OrientedBox]]) -> float:
    """RMS of the 3D center error over matched pairs."""
    sq = [center_distance(g, p) ** 2 for g, p in pairs]
    if not sq:
        raise UndefinedMetricError("position RMSE needs at least one matched pair")
    return math.sqrt(sum(sq) / len(sq))


def yaw_rmse(pairs: Iterable[tuple[OrientedBox, OrientedBox]]) -> float:
    """RMS of the wrapped yaw error over matched pairs. Symmetry-blind: a
    half-turn flip scores as a pi error."""
    sq = [yaw_difference(g.yaw, p.yaw) ** 2 for g, p in pairs]
    if not sq:
        raise UndefinedMetricError("yaw RMSE needs at least one matched pair")
    return math.sqrt(sum(sq) / len(sq))


def _check_frame_alignment(gt_frames: Sequence[FrameRecord], pred_frames: Sequence[FrameRecord]):
    if len(gt_frames) != len(pred_frames):
        raise AlignmentError(
            f"stream lengths differ: {len(gt_frames)} ground-truth vs {len(pred_frames)} predicted frames"
        )
    for g, p in zip(gt_frames, pred_frames):
        if g.t != p.t:
            raise AlignmentError(f"timestamp mismatch: {g.t} vs {p.t}")


def _require_ids(frames: Sequence[FrameRecord], label: str) -> None:
    for f in frames:
        if f.ids is None:
            raise InvalidInputError(f"{label} stream needs persistent ids at t={f.t}")
        if len(set(f.ids)) != len(f.ids):
            raise InvalidInputError(f"duplicate {label} ids within frame t={f.t}")


def _hota_single(
    gt_frames: Sequence[FrameRecord], pred_frames: Sequence[FrameRecord], alpha: float
) -> tuple[float, float, float]:
    """(HOTA, DetA, AssA) at one IoU threshold."""
    tp = fp = fn = 0
    co: dict[tuple[int, int], int] = {}
    gt_tp: dict[int, int] = {}
    pred_tp: dict[int, int] = {}
    gt_fn: dict[int, int] = {}
    pred_fp: dict[int, int] = {}
    tp_instances: list[tuple[int, int]] = []

    for gt_rec, pred_rec in zip(gt_frames, pred_frames):
        pairing = match_frame(gt_rec.boxes, pred_rec.boxes, alpha, gt_rec.t)
        tp += pairing.tp
        fp += pairing.fp
        fn += pairing.fn
        for gi, pi, _ in pairing.tp_pairs:
            gid, pid = gt_rec.ids[gi], pred_rec.ids[pi]
            co[(gid, pid)] = co.get((gid, pid), 0) + 1
            gt_tp[gid] = gt_tp.get(gid, 0) + 1
            pred_tp[pid] = pred_tp.get(pid, 0) + 1
            tp_instances.append((gid, pid))
        for gi in pairing.fn_indices:
            gid = gt_rec.ids[gi]
            gt_fn[gid] = gt_fn.get(gid, 0) + 1
        for pi in pairing.fp_indices:
            pid = pred_rec.ids[pi]
            pred_fp[pid] = pred_fp.get(pid, 0) + 1

    denom = tp + fp + fn
    if denom == 0:
        raise UndefinedMetricError("no ground truth and no predictions anywhere")
    deta = tp / denom

    if tp_instances:
        acc = 0.0
        for gid, pid in tp_instances:
            tpa = co[(gid, pid)]
            fna = gt_tp[gid] - tpa + gt_fn.get(gid, 0)
            fpa = pred_tp[pid] - tpa + pred_fp.get(pid, 0)
            acc += tpa / (tpa + fna + fpa)
        assa = acc / len(tp_instances)
    else:
        assa = 0.0
    return math.sqrt(deta * assa), deta, assa


def hota(
    gt_frames: Sequence[FrameRecord],
    pred_frames: Sequence[FrameRecord],
    alpha: float = 0.5,
    alpha_sweep: bool = False,
) -> float:
    """Higher-order tracking accuracy over frame-aligned, id-labeled streams.

    With `alpha_sweep` the score is averaged over IoU thresholds
    0.05, 0.10, ..., 0.95 instead of using the single `alpha`.
    """
    _check_frame_alignment(gt_frames, pred_frames)
    _require_ids(gt_frames, "ground truth")
    _require_ids(pred_frames, "prediction")
    if alpha_sweep:
        scores = [_hota_single(gt_frames, pred_frames, a)[0] for a in ALPHA_SWEEP]
        return sum(scores) / len(scores)
    return _hota_single(gt_frames, pred_frames, alpha)[0]


@dataclass(frozen=True)
class ClassMetrics:
    avg_iou: float | None
    pos_rmse: float | None
    yaw_rmse: float | None
    det_a: float | None
    hota: float | None
    tp: int
    fp: int
    fn: int
    id_switches: int | None

    def to_dict(self) -> dict:
        return {
            "avg_iou": self.avg_iou,
            "pos_rmse": self.pos_rmse,
            "yaw_rmse": self.yaw_rmse,
            "det_a": self.det_a,
            "hota": self.hota,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "id_switches": self.id_switches,
        }


@dataclass(frozen=True)
class MetricsReport:
    mode: str
    overall: ClassMetrics
    per_class: dict[str, ClassMetrics]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "overall": self.overall.to_dict(),
            "per_class": {c: m.to_dict() for c, m in sorted(self.per_class.items())},
        }


def _id_switches(gt_frames: Sequence[FrameRecord], pred_frames: Sequence[FrameRecord], alpha: float) -> int:
    last_pred: dict[int, int] = {}
    switches = 0
    for gt_rec, pred_rec in zip(gt_frames, pred_frames):
        pairing = match_frame(gt_rec.boxes, pred_rec.boxes, alpha, gt_rec.t)
        for gi, pi, _ in pairing.tp_pairs:
            gid, pid = gt_rec.ids[gi], pred_rec.ids[pi]
            if gid in last_pred and last_pred[gid] != pid:
                switches += 1
            last_pred[gid] = pid
    return switches


def _restrict(rec: FrameRecord, class_id: str) -> FrameRecord:
    keep = [i for i, b in enumerate(rec.boxes) if b.class_id == class_id]
    return FrameRecord(
        rec.t,
        rec.robot,
        tuple(rec.boxes[i] for i in keep),
        tuple(rec.ids[i] for i in keep) if rec.ids is not None else None,
    )


def _single_class_metrics(
    gt_frames: Sequence[FrameRecord],
    pred_frames: Sequence[FrameRecord],
    mode: str,
    alpha: float,
    alpha_sweep: bool,
) -> ClassMetrics:
    pairings = []
    tp_boxes: list[tuple[OrientedBox, OrientedBox]] = []
    iou_total = 0.0
    gt_total = 0
    for gt_rec, pred_rec in zip(gt_frames, pred_frames):
        pairing = match_frame(gt_rec.boxes, pred_rec.boxes, alpha, gt_rec.t)
        pairings.append(pairing)
        for gi, pi, _ in pairing.tp_pairs:
            tp_boxes.append((gt_rec.boxes[gi], pred_rec.boxes[pi]))
        # threshold-free coverage matching for the average IoU column
        loose = match_frame(gt_rec.boxes, pred_rec.boxes, 0.0, gt_rec.t)
        iou_total += sum(v for _, _, v in loose.tp_pairs)
        gt_total += len(gt_rec.boxes)

    try:
        deta = det_a(pairings)
    except UndefinedMetricError:
        deta = None
    try:
        prmse = pos_rmse(tp_boxes)
        yrmse = yaw_rmse(tp_boxes)
    except UndefinedMetricError:
        prmse = yrmse = None

    hota_score: float | None = None
    switches: int | None = None
    if mode == "tracklet":
        try:
            hota_score = hota(gt_frames, pred_frames, alpha, alpha_sweep)
        except UndefinedMetricError:
            hota_score = None
        switches = _id_switches(gt_frames, pred_frames, alpha)

    return ClassMetrics(
        avg_iou=(iou_total / gt_total) if gt_total else None,
        pos_rmse=prmse,
        yaw_rmse=yrmse,
        det_a=deta,
        hota=hota_score,
        tp=sum(p.tp for p in pairings),
        fp=sum(p.fp for p in pairings),
        fn=sum(p.fn for p in pairings),
        id_switches=switches,
    )


def evaluate_streams(
    gt_frames: Sequence[FrameRecord],
    pred_frames: Sequence[FrameRecord],
    mode: str = "tracklet",
    alpha: float = 0.5,
    alpha_sweep: bool = False,
) -> MetricsReport:
    """Full report over frame-aligned map-frame streams.

    `mode` is either "detection" (no identity metrics) or "tracklet"
    (adds HOTA and id switches; predictions must carry ids).
    """
    if mode not in ("detection", "tracklet"):
        raise InvalidInputError(f"unknown evaluation mode {mode!r}")
    _check_frame_alignment(gt_frames, pred_frames)
    _require_ids(gt_frames, "ground truth")
    if mode == "tracklet":
        _require_ids(pred_frames, "prediction")

    classes = sorted(
        {b.class_id for f in gt_frames for b in f.boxes}
        | {b.class_id for f in pred_frames for b in f.boxes}
    )
    per_class = {
        c: _single_class_metrics(
            [_restrict(f, c) for f in gt_frames],
            [_restrict(f, c) for f in pred_frames],
            mode,
            alpha,
            alpha_sweep,
        )
        for c in classes
    }
    overall = _single_class_metrics(gt_frames, pred_frames, mode, alpha, alpha_sweep)
    return MetricsReport(mode=mode, overall=overall, per_class=per_class)
