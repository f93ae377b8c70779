import json
import math

import pytest

from obbtrack.cli import main
from obbtrack.geometry import center_distance, transform_to_map, yaw_difference
from obbtrack.streams import dumps_stream, loads_stream, read_stream, KIND_DETECTIONS


@pytest.fixture
def trial_sheet(tmp_path):
    path = tmp_path / "trials.json"
    assert main(["doe", "gen", "--out", str(path)]) == 0
    return path


class TestDoeGen:
    def test_default_campaign_size(self, trial_sheet):
        payload = json.loads(trial_sheet.read_text())
        assert payload["schema"] == "obbtrack/trials/v1"
        assert len(payload["trials"]) == 72

    def test_block_filter(self, tmp_path):
        out = tmp_path / "t.json"
        assert main(["doe", "gen", "--out", str(out), "--block", "single-msu"]) == 0
        assert len(json.loads(out.read_text())["trials"]) == 18

    def test_invalid_block_is_usage_error(self, tmp_path):
        out = tmp_path / "t.json"
        assert main(["doe", "gen", "--out", str(out), "--block", "nope"]) == 1


class TestSimulate:
    def test_deterministic_per_seed(self, tmp_path, trial_sheet):
        outs = []
        for run in ("a", "b"):
            gt = tmp_path / f"gt_{run}.jsonl"
            det = tmp_path / f"det_{run}.jsonl"
            code = main(
                ["simulate", "--trials", str(trial_sheet), "--trial", "19", "--seed", "5",
                 "--out-gt", str(gt), "--out-det", str(det)]
            )
            assert code == 0
            outs.append((gt.read_bytes(), det.read_bytes()))
        assert outs[0] == outs[1]

    def test_different_seeds_differ(self, tmp_path, trial_sheet):
        dets = []
        for seed in ("5", "6"):
            gt = tmp_path / f"gt{seed}.jsonl"
            det = tmp_path / f"det{seed}.jsonl"
            main(["simulate", "--trials", str(trial_sheet), "--trial", "1", "--seed", seed,
                  "--out-gt", str(gt), "--out-det", str(det)])
            dets.append(det.read_bytes())
        assert dets[0] != dets[1]

    def test_unknown_trial_is_usage_error(self, tmp_path, trial_sheet):
        assert main(["simulate", "--trials", str(trial_sheet), "--trial", "99"]) == 1

    def test_no_noise_round_trip(self, tmp_path, trial_sheet):
        gt_path = tmp_path / "gt.jsonl"
        det_path = tmp_path / "det.jsonl"
        main(["simulate", "--trials", str(trial_sheet), "--trial", "2", "--seed", "3",
              "--out-gt", str(gt_path), "--out-det", str(det_path), "--no-noise"])
        _, gt = read_stream(gt_path)
        _, det = read_stream(det_path)
        for g, d in zip(gt, det):
            assert len(g.boxes) == len(d.boxes)
            for gb, db in zip(g.boxes, d.boxes):
                mapped = transform_to_map(db, d.robot)
                assert center_distance(mapped, gb) < 1e-9
                assert yaw_difference(mapped.yaw, gb.yaw) < 1e-9


class TestTrackAndEvaluate:
    def pipeline(self, tmp_path, trial_sheet, trial="2", extra=("--no-noise",)):
        gt = tmp_path / "gt.jsonl"
        det = tmp_path / "det.jsonl"
        trk = tmp_path / "trk.jsonl"
        assert main(["simulate", "--trials", str(trial_sheet), "--trial", trial, "--seed", "3",
                     "--out-gt", str(gt), "--out-det", str(det), *extra]) == 0
        assert main(["track", "--input", str(det), "--output", str(trk)]) == 0
        return gt, det, trk

    def test_empty_input_empty_output(self, tmp_path):
        det = tmp_path / "det.jsonl"
        det.write_text(dumps_stream([], KIND_DETECTIONS))
        out = tmp_path / "trk.jsonl"
        assert main(["track", "--input", str(det), "--output", str(out)]) == 0
        kind, records = read_stream(out)
        assert kind == "tracklets"
        assert records == []

    def test_persistent_identity(self, tmp_path, trial_sheet):
        _, _, trk = self.pipeline(tmp_path, trial_sheet)
        _, records = read_stream(trk)
        ids = {i for r in records for i in (r.ids or ())}
        assert len(ids) == 1

    def test_out_of_order_timestamps_rejected(self, tmp_path):
        det = tmp_path / "det.jsonl"
        text = dumps_stream([], KIND_DETECTIONS)
        rec = '{"t":%s,"robot":{"x":0,"y":0,"heading":0},"boxes":[]}'
        det.write_text(text + (rec % "1.0") + "\n" + (rec % "0.5") + "\n")
        assert main(["track", "--input", str(det), "--output", str(tmp_path / "o.jsonl")]) == 2

    def test_missing_file_is_data_error(self, tmp_path):
        assert main(["track", "--input", str(tmp_path / "nope.jsonl"),
                     "--output", str(tmp_path / "o.jsonl")]) == 2

    def test_evaluate_gt_against_itself(self, tmp_path, trial_sheet, capsys):
        gt, _, _ = self.pipeline(tmp_path, trial_sheet)
        report_path = tmp_path / "report.json"
        assert main(["evaluate", "--gt", str(gt), "--pred", str(gt), "--json", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert report["mode"] == "tracklet"
        assert report["overall"]["avg_iou"] == pytest.approx(1.0)
        assert report["overall"]["det_a"] == 1.0
        assert report["overall"]["hota"] == pytest.approx(1.0)
        assert report["overall"]["pos_rmse"] == 0.0

    def test_evaluate_detection_mode_omits_hota(self, tmp_path, trial_sheet, capsys):
        gt, det, _ = self.pipeline(tmp_path, trial_sheet)
        report_path = tmp_path / "report.json"
        assert main(["evaluate", "--gt", str(gt), "--pred", str(det), "--json", str(report_path)]) == 0
        out = capsys.readouterr().out
        assert report_path.exists()
        report = json.loads(report_path.read_text())
        assert report["mode"] == "detection"
        assert report["overall"]["hota"] is None
        table_row = [l for l in out.splitlines() if l.startswith("Overall")][0]
        assert table_row.rstrip().endswith("-")

    def test_tracklet_pipeline_scores_high_without_noise(self, tmp_path, trial_sheet):
        gt, _, trk = self.pipeline(tmp_path, trial_sheet)
        report_path = tmp_path / "report.json"
        assert main(["evaluate", "--gt", str(gt), "--pred", str(trk), "--json", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert report["overall"]["hota"] > 0.85
        assert report["overall"]["pos_rmse"] < 0.01

    def test_config_unknown_key_is_usage_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("tracker.not_a_knob = 3\n")
        assert main(["--config", str(cfg), "doe", "gen", "--out", str(tmp_path / "t.json")]) == 1


class TestCampaign:
    def test_single_block_run_deterministic(self, tmp_path):
        reports = []
        for run in ("a", "b"):
            out = tmp_path / f"rep_{run}.json"
            assert main(["campaign", "run", "--seed", "7", "--block", "single-sw",
                         "--out", str(out)]) == 0
            reports.append(out.read_bytes())
        assert reports[0] == reports[1]
        payload = json.loads(reports[0])
        assert payload["trial_count"] == 18
        assert "SW" in payload["per_class"]
        sw = payload["per_class"]["SW"]
        assert sw["tracklet"]["avg_iou"] > sw["detection"]["avg_iou"]
        assert sw["detection"]["hota"] is None
