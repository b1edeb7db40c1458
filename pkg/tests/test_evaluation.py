"""Localization metrics and report generation."""

import csv
import json
import math

import numpy as np
import pytest

from partaog import (
    AndOrGraph,
    MiningConfig,
    VolumeStore,
    channel_stats,
    evaluate,
    mine_template,
    normalized_distance,
    pcp_hit,
    write_report_csv,
    write_report_json,
)
from partaog.errors import AnnotationError, EmptyModelError
from partaog.geometry import Box

from test_mining import annots_from_gt, bump_dataset


class TestNormalizedDistance:
    def test_hand_value(self):
        # 50 px apart inside a 100x100 image: 50 / sqrt(20000)
        d = normalized_distance((10.0, 10.0), (40.0, 50.0), 100.0, 100.0)
        assert d == pytest.approx(0.35355339059, abs=1e-9)

    def test_zero_at_same_point(self):
        assert normalized_distance((5.0, 5.0), (5.0, 5.0), 64.0, 64.0) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(167)
        for _ in range(100):
            a = tuple(rng.uniform(0, 64, size=2))
            b = tuple(rng.uniform(0, 64, size=2))
            assert normalized_distance(a, b, 64, 48) == normalized_distance(b, a, 64, 48)

    def test_scales_with_diagonal(self):
        a, b = (0.0, 0.0), (30.0, 40.0)
        assert normalized_distance(a, b, 100, 100) == pytest.approx(
            50.0 / math.hypot(100, 100)
        )
        assert normalized_distance(a, b, 200, 200) == pytest.approx(
            50.0 / math.hypot(200, 200)
        )

    def test_rejects_degenerate_image(self):
        with pytest.raises(ValueError):
            normalized_distance((0, 0), (1, 1), 0.0, 64.0)


class TestPcpHit:
    def test_threshold_is_half_iou(self):
        gt = Box(0.0, 0.0, 10.0, 10.0)
        assert pcp_hit(gt, gt)
        assert not pcp_hit(Box(0.0, 0.0, 1.0, 1.0), gt)
        # unit boxes offset by half their width have IoU 1/3 < 0.5
        assert not pcp_hit(Box(0.5, 0.0, 1.0, 1.0), Box(0.0, 0.0, 1.0, 1.0))

    def test_exact_boundary_counts(self):
        # two 2x1 boxes overlapping on half their area: IoU = 1/3; instead
        # construct IoU exactly 0.5: inter 2, union 4
        a = Box(0.0, 0.0, 3.0, 1.0)
        b = Box(1.0, 0.0, 2.0, 1.0)
        assert a.iou(b) == pytest.approx(2.0 / 3.0)
        c = Box(0.0, 0.0, 2.0, 2.0)
        d = Box(0.0, 1.0, 2.0, 2.0)  # inter 2, union 6 -> 1/3, miss
        assert not pcp_hit(d, c)
        e = Box(0.0, 0.0, 2.0, 3.0)
        f = Box(0.0, 1.0, 2.0, 2.0)  # inter 4, union 6 -> 2/3, hit
        assert pcp_hit(f, e)


class TestEvaluate:
    def make_trained(self):
        store, gt = bump_dataset(num_images=10, center_jitter=0)
        stats = channel_stats(store)
        annots = annots_from_gt(gt, store.ids()[:4])
        template = mine_template(
            "only", annots, store, stats, MiningConfig(patterns_per_template=2, window_radius=2.0)
        )
        aog = AndOrGraph(part_name="part", templates=(template,))
        return store, gt, stats, aog

    def test_perfect_model_on_clean_data(self):
        store, gt, stats, aog = self.make_trained()
        report = evaluate(aog, store, gt, stats)
        assert report.pcp_percent == 100.0
        assert report.mean_norm_dist == pytest.approx(0.0, abs=1e-9)
        assert len(report.rows) == len(store)

    def test_rows_recompute_aggregates(self):
        store, gt, stats, aog = self.make_trained()
        report = evaluate(aog, store, gt, stats)
        mean = sum(r.norm_dist for r in report.rows) / len(report.rows)
        hits = 100.0 * sum(1 for r in report.rows if r.hit) / len(report.rows)
        assert report.mean_norm_dist == pytest.approx(mean)
        assert report.pcp_percent == pytest.approx(hits)

    def test_part_free_images_are_excluded(self):
        store, gt, stats, aog = self.make_trained()
        gt = dict(gt)
        absent_id = store.ids()[-1]
        gt[absent_id] = None
        report = evaluate(aog, store, gt, stats)
        assert report.absent_count == 1
        assert len(report.rows) == len(store) - 1
        assert all(r.image_id != absent_id for r in report.rows)

    def test_empty_evaluation_set(self):
        store, gt, stats, aog = self.make_trained()
        gt = {image_id: None for image_id in store.ids()}
        report = evaluate(aog, store, gt, stats)
        assert report.empty
        assert report.mean_norm_dist is None
        assert report.pcp_percent is None

    def test_missing_ground_truth_listed(self):
        store, gt, stats, aog = self.make_trained()
        gt = dict(gt)
        missing = store.ids()[2]
        del gt[missing]
        with pytest.raises(AnnotationError) as err:
            evaluate(aog, store, gt, stats)
        assert missing in str(err.value)

    def test_ids_subset(self):
        store, gt, stats, aog = self.make_trained()
        ids = store.ids()[:3]
        report = evaluate(aog, store, gt, stats, ids=ids)
        assert [r.image_id for r in report.rows] == ids

    def test_empty_model_raises(self):
        store, gt, stats, _ = self.make_trained()
        with pytest.raises(EmptyModelError):
            evaluate(AndOrGraph(part_name="part", templates=()), store, gt, stats)


class TestReports:
    def test_json_report(self, tmp_path):
        store, gt = bump_dataset(num_images=6)
        stats = channel_stats(store)
        annots = annots_from_gt(gt, store.ids()[:3])
        template = mine_template(
            "only", annots, store, stats, MiningConfig(patterns_per_template=2, window_radius=2.0)
        )
        aog = AndOrGraph(part_name="part", templates=(template,))
        report = evaluate(aog, store, gt, stats)
        path = tmp_path / "report.json"
        write_report_json(report, path)
        doc = json.loads(path.read_text())
        assert doc["pcp_percent"] == report.pcp_percent
        assert len(doc["rows"]) == len(report.rows)

    def test_csv_report(self, tmp_path):
        store, gt = bump_dataset(num_images=6)
        stats = channel_stats(store)
        annots = annots_from_gt(gt, store.ids()[:3])
        template = mine_template(
            "only", annots, store, stats, MiningConfig(patterns_per_template=2, window_radius=2.0)
        )
        aog = AndOrGraph(part_name="part", templates=(template,))
        report = evaluate(aog, store, gt, stats)
        path = tmp_path / "report.csv"
        write_report_csv(report, path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == len(report.rows)
        assert rows[0]["image_id"] == report.rows[0].image_id
        assert float(rows[0]["norm_dist"]) == pytest.approx(report.rows[0].norm_dist)
