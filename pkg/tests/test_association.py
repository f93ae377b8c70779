import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obbtrack.association import associate, gate_threshold
from obbtrack.errors import InvalidInputError
from obbtrack.geometry import OrientedBox, center_distance


def box(cx=0.0, cy=0.0, cz=0.0, l=1.0, w=1.0, h=1.0, cls="MSU"):
    return OrientedBox((cx, cy, cz), (l, w, h), 0.0, cls)


def greedy_oracle(dets, trks, gate_scale=1.0):
    """Independent re-implementation: repeated argmin over the live pair matrix."""
    pairs = {}
    for tid, tbox in trks:
        for di, det in enumerate(dets):
            if det.class_id == tbox.class_id:
                d = center_distance(det, tbox)
                if d <= gate_threshold(det, tbox, gate_scale):
                    pairs[(tid, di)] = d
    matches = []
    free_t = {tid for tid, _ in trks}
    free_d = set(range(len(dets)))
    while True:
        live = [
            (d, tid, di)
            for (tid, di), d in pairs.items()
            if tid in free_t and di in free_d
        ]
        if not live:
            break
        d, tid, di = min(live)
        matches.append((tid, di, d))
        free_t.discard(tid)
        free_d.discard(di)
    return sorted(matches)


class TestGate:
    def test_unit_squares(self):
        assert gate_threshold(box(), box()) == pytest.approx(0.5 * math.sqrt(2))

    def test_mixed_sizes(self):
        assert gate_threshold(box(l=2.0, w=1.0), box()) == pytest.approx(0.5 * math.sqrt(5))

    def test_symmetric(self):
        a, b = box(l=2.0, w=1.0), box(l=1.0, w=3.0)
        assert gate_threshold(a, b) == gate_threshold(b, a)

    def test_scale(self):
        assert gate_threshold(box(), box(), scale=2.0) == pytest.approx(math.sqrt(2))


class TestAssociate:
    def test_empty_detections(self):
        res = associate([], [(1, box()), (2, box(cx=3))])
        assert res.matches == []
        assert res.unmatched_tracklets == [1, 2]

    def test_single_match_inside_gate(self):
        res = associate([box(cx=0.1)], [(7, box())])
        assert res.matches == [(7, 0, pytest.approx(0.1))]
        assert res.unmatched_detections == []
        assert res.unmatched_tracklets == []

    def test_far_detection_unmatched(self):
        res = associate([box(cx=5.0)], [(1, box())])
        assert res.unmatched_detections == [0]
        assert res.unmatched_tracklets == [1]

    def test_cross_class_never_matches(self):
        res = associate([box(cls="MW")], [(1, box(cls="MSU"))])
        assert res.matches == []

    def test_duplicate_id_rejected(self):
        with pytest.raises(InvalidInputError):
            associate([], [(1, box()), (1, box())])

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=60)
    def test_matches_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        dets = [box(*rng.uniform(-1.5, 1.5, 2)) for _ in range(3)]
        trks = [(tid, box(*rng.uniform(-1.5, 1.5, 2))) for tid in (10, 11, 12)]
        res = associate(dets, trks)
        assert sorted(res.matches) == greedy_oracle(dets, trks)

    @given(st.integers(0, 2**31 - 1), st.permutations([0, 1, 2, 3]))
    @settings(max_examples=60)
    def test_permutation_invariant(self, seed, perm):
        rng = np.random.default_rng(seed)
        dets = [box(*rng.uniform(-1.0, 1.0, 2)) for _ in range(4)]
        trks = [(tid, box(*rng.uniform(-1.0, 1.0, 2))) for tid in range(4)]
        base = {(tid, dets[di].center) for tid, di, _ in associate(dets, trks).matches}
        shuffled = [dets[i] for i in perm]
        out = {(tid, shuffled[di].center) for tid, di, _ in associate(shuffled, trks).matches}
        assert base == out

    def test_one_to_one(self):
        dets = [box(cx=0.05), box(cx=-0.05)]
        trks = [(1, box()), (2, box(cx=0.01))]
        res = associate(dets, trks)
        tids = [m[0] for m in res.matches]
        dis = [m[1] for m in res.matches]
        assert len(set(tids)) == len(tids)
        assert len(set(dis)) == len(dis)
        assert len(res.matches) == 2

    def test_no_starvation(self):
        res = associate([box(cx=0.3, cls="MW"), box(cx=9.0)], [(5, box(cls="MW"))])
        assert res.matches[0][:2] == (5, 0)
