"""Part-localization metrics: normalized center distance and PCP (IoU >= 0.5)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .annotations import GroundTruth
from .aog.model import AndOrGraph
from .aog.parsing import parse_many
from .errors import AnnotationError
from .geometry import Box, Point, distance


def normalized_distance(pred: Point, gt: Point, image_w: float, image_h: float) -> float:
    """Center error over the image diagonal; images are pre-cropped objects."""
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dimensions must be positive")
    return distance(pred, gt) / math.hypot(image_w, image_h)


def pcp_hit(pred_box: Box, gt_box: Box) -> bool:
    return pred_box.iou(gt_box) >= 0.5


@dataclass(frozen=True)
class EvalRow:
    image_id: str
    pred_box: Box
    pred_center: Point
    gt_box: Box
    gt_center: Point
    norm_dist: float
    hit: bool


@dataclass(frozen=True)
class LocalizationReport:
    rows: tuple[EvalRow, ...]
    absent_count: int = 0  # part-free test images, excluded from all aggregates

    @property
    def empty(self) -> bool:
        return not self.rows

    @property
    def mean_norm_dist(self) -> float | None:
        if not self.rows:
            return None
        return sum(r.norm_dist for r in self.rows) / len(self.rows)

    @property
    def pcp_percent(self) -> float | None:
        if not self.rows:
            return None
        return 100.0 * sum(1 for r in self.rows if r.hit) / len(self.rows)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "image_id": r.image_id,
                    "pred_box": r.pred_box.to_list(),
                    "pred_center": list(r.pred_center),
                    "gt_box": r.gt_box.to_list(),
                    "gt_center": list(r.gt_center),
                    "norm_dist": r.norm_dist,
                    "pcp_hit": r.hit,
                }
                for r in self.rows
            ],
            "absent_count": self.absent_count,
            "mean_norm_dist": self.mean_norm_dist,
            "pcp_percent": self.pcp_percent,
            "empty": self.empty,
        }


def evaluate(aog: AndOrGraph, store, gt: GroundTruth, stats, ids=None) -> LocalizationReport:
    """Parse every test image and score it against ground truth.

    Every evaluated id must appear in gt, either with an annotation or as
    None (part-free); part-free images are counted but never parsed.
    """
    if ids is None:
        ids = sorted(store.ids())
    ids = list(ids)
    missing = [i for i in ids if i not in gt]
    if missing:
        raise AnnotationError("no ground truth for images: %s" % ", ".join(missing))
    present = [i for i in ids if gt[i] is not None]
    parses = parse_many(store, aog, stats, ids=present)
    rows = []
    for image_id in present:
        pg = parses[image_id]
        truth = gt[image_id]
        image_w, image_h = store.image_size(image_id)
        rows.append(
            EvalRow(
                image_id=image_id,
                pred_box=pg.part_box,
                pred_center=pg.part_center,
                gt_box=truth.box,
                gt_center=truth.box.center,
                norm_dist=normalized_distance(pg.part_center, truth.box.center, image_w, image_h),
                hit=pcp_hit(pg.part_box, truth.box),
            )
        )
    return LocalizationReport(rows=tuple(rows), absent_count=len(ids) - len(present))


def write_report_json(report: LocalizationReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n")


def write_report_csv(report: LocalizationReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "image_id",
                "pred_x", "pred_y", "pred_w", "pred_h",
                "gt_x", "gt_y", "gt_w", "gt_h",
                "norm_dist", "pcp_hit",
            ]
        )
        for r in report.rows:
            writer.writerow(
                [r.image_id]
                + r.pred_box.to_list()
                + r.gt_box.to_list()
                + [r.norm_dist, int(r.hit)]
            )
