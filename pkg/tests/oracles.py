"""Brute-force oracles, written independently of the package's code paths:
Monte-Carlo volume sampling instead of polygon clipping, exhaustive matching
enumeration instead of the Hungarian solver, and a from-scratch
association-accuracy recount."""
import itertools
import math

import numpy as np

from obbtrack.geometry import OrientedBox, iou_3d


def mc_iou(a: OrientedBox, b: OrientedBox, n=200_000, seed=0) -> float:
    """Monte-Carlo volume oracle: uniform point sampling in the joint AABB."""
    rng = np.random.default_rng(seed)
    los, his = [], []
    for bx in (a, b):
        c, s = math.cos(bx.yaw), math.sin(bx.yaw)
        corners = np.array(
            [
                [
                    bx.center[0] + c * sx * bx.extent[0] / 2 - s * sy * bx.extent[1] / 2,
                    bx.center[1] + s * sx * bx.extent[0] / 2 + c * sy * bx.extent[1] / 2,
                ]
                for sx in (-1, 1)
                for sy in (-1, 1)
            ]
        )
        los.append([corners[:, 0].min(), corners[:, 1].min(), bx.center[2] - bx.extent[2] / 2])
        his.append([corners[:, 0].max(), corners[:, 1].max(), bx.center[2] + bx.extent[2] / 2])
    lo = np.minimum(*los)
    hi = np.maximum(*his)
    pts = rng.uniform(lo, hi, size=(n, 3))

    def inside(bx):
        d = pts[:, :2] - np.array(bx.center[:2])
        c, s = math.cos(bx.yaw), math.sin(bx.yaw)
        px = c * d[:, 0] + s * d[:, 1]
        py = -s * d[:, 0] + c * d[:, 1]
        return (
            (np.abs(px) <= bx.extent[0] / 2)
            & (np.abs(py) <= bx.extent[1] / 2)
            & (np.abs(pts[:, 2] - bx.center[2]) <= bx.extent[2] / 2)
        )

    in_a, in_b = inside(a), inside(b)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union


def random_micro_sequence(seed, n_objects=3, n_frames=5):
    """Random tracking scenario: drops, id switches, and false positives."""
    rng = np.random.default_rng(seed)
    n_obj = rng.integers(1, n_objects + 1)
    n_frm = rng.integers(1, n_frames + 1)
    centers = rng.uniform(-3, 3, (n_obj, 2))
    classes = rng.choice(["MW", "MSU"], n_obj)

    def box(cx, cy, cls):
        return OrientedBox((cx, cy, 0.0), (1.4, 1.1, 1.0), 0.0, cls)

    frames = []
    for _ in range(n_frm):
        gt_boxes = [box(c[0], c[1], cls) for c, cls in zip(centers, classes)]
        gt_ids = list(range(n_obj))
        pred_boxes, pred_ids = [], []
        for i in range(n_obj):
            if rng.random() < 0.75:
                jitter = rng.uniform(-0.35, 0.35, 2)
                pred_boxes.append(box(centers[i][0] + jitter[0], centers[i][1] + jitter[1], classes[i]))
                pred_ids.append(int(i + 100) if rng.random() > 0.2 else int(i + 200))
        if rng.random() < 0.3:
            pos = rng.uniform(-3, 3, 2)
            pred_boxes.append(box(pos[0], pos[1], "MW"))
            pred_ids.append(999)
        frames.append((gt_boxes, gt_ids, pred_boxes, pred_ids))
    return frames


def enumerate_matchings(n_gt, n_pred):
    """All one-to-one partial matchings between range(n_gt) and range(n_pred)."""
    for size in range(min(n_gt, n_pred) + 1):
        for gs in itertools.combinations(range(n_gt), size):
            for ps in itertools.permutations(range(n_pred), size):
                yield list(zip(gs, ps))


def brute_force_match(gt, pred, alpha=0.5):
    """Best matching by (pair count, total IoU), considering every candidate."""
    iou = {}
    for i, g in enumerate(gt):
        for j, p in enumerate(pred):
            if g.class_id == p.class_id:
                v = iou_3d(g, p)
                if v > alpha:
                    iou[(i, j)] = v
    best, best_key = [], (-1, -math.inf)
    for matching in enumerate_matchings(len(gt), len(pred)):
        if any(pair not in iou for pair in matching):
            continue
        key = (len(matching), sum(iou[p] for p in matching))
        if key > best_key:
            best_key = key
            best = matching
    return sorted((i, j, iou[(i, j)]) for i, j in best)


def deta_oracle(frames, alpha=0.5):
    """frames: list of (gt_boxes, gt_ids, pred_boxes, pred_ids)."""
    tp = fp = fn = 0
    for gt_boxes, _, pred_boxes, _ in frames:
        pairs = brute_force_match(gt_boxes, pred_boxes, alpha)
        tp += len(pairs)
        fp += len(pred_boxes) - len(pairs)
        fn += len(gt_boxes) - len(pairs)
    return tp / (tp + fp + fn)


def hota_oracle(frames, alpha=0.5):
    """HOTA recount from first principles on a micro-sequence."""
    tp_list = []  # (gt id, pred id) per TP instance, in frame order
    fn_ids, fp_ids = [], []
    tp = fp = fn = 0
    for gt_boxes, gt_ids, pred_boxes, pred_ids in frames:
        pairs = brute_force_match(gt_boxes, pred_boxes, alpha)
        matched_g = {i for i, _, _ in pairs}
        matched_p = {j for _, j, _ in pairs}
        tp += len(pairs)
        fp += len(pred_boxes) - len(pairs)
        fn += len(gt_boxes) - len(pairs)
        tp_list.extend((gt_ids[i], pred_ids[j]) for i, j, _ in pairs)
        fn_ids.extend(gt_ids[i] for i in range(len(gt_boxes)) if i not in matched_g)
        fp_ids.extend(pred_ids[j] for j in range(len(pred_boxes)) if j not in matched_p)
    deta = tp / (tp + fp + fn)
    if not tp_list:
        return 0.0, deta, 0.0
    acc = 0.0
    for gid, pid in tp_list:
        tpa = sum(1 for g, p in tp_list if (g, p) == (gid, pid))
        fna = sum(1 for g, p in tp_list if g == gid and p != pid) + fn_ids.count(gid)
        fpa = sum(1 for g, p in tp_list if p == pid and g != gid) + fp_ids.count(pid)
        acc += tpa / (tpa + fna + fpa)
    assa = acc / len(tp_list)
    return math.sqrt(deta * assa), deta, assa
