"""Part annotations and their append-only line-delimited JSON store.

One record per line: {"image_id", "box": [x, y, w, h], "template_label",
"flipped"}. Ground-truth files reuse the same records and additionally allow
{"image_id", "absent": true} lines for part-free images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import AnnotationError
from .geometry import Box


@dataclass(frozen=True)
class PartAnnotation:
    image_id: str
    box: Box
    template_label: str
    flipped: bool = False

    def __post_init__(self):
        if self.box.w <= 0 or self.box.h <= 0:
            raise AnnotationError(
                "degenerate box %r for image %r" % (self.box.to_list(), self.image_id)
            )
        if not self.template_label:
            raise AnnotationError("empty template label for image %r" % self.image_id)

    def mirrored(self, image_w: float) -> "PartAnnotation":
        return replace(self, box=self.box.mirror_x(image_w))

    def to_record(self) -> dict:
        return {
            "image_id": self.image_id,
            "box": self.box.to_list(),
            "template_label": self.template_label,
            "flipped": self.flipped,
        }

    @staticmethod
    def from_record(rec: dict) -> "PartAnnotation":
        return PartAnnotation(
            image_id=rec["image_id"],
            box=Box.from_list(rec["box"]),
            template_label=rec["template_label"],
            flipped=bool(rec.get("flipped", False)),
        )


def check_box_within(annot: PartAnnotation, image_w: float, image_h: float) -> None:
    b = annot.box
    if b.x < 0 or b.y < 0 or b.x2 > image_w or b.y2 > image_h:
        raise AnnotationError(
            "box %r for image %r exceeds %gx%g image bounds"
            % (b.to_list(), annot.image_id, image_w, image_h)
        )


def append_annotation(path, annot: PartAnnotation) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps(annot.to_record(), sort_keys=True) + "\n")


def write_annotations(path, annots) -> None:
    with open(path, "w") as fh:
        for a in annots:
            fh.write(json.dumps(a.to_record(), sort_keys=True) + "\n")


def read_annotations(path) -> list[PartAnnotation]:
    annots = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            annots.append(PartAnnotation.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise AnnotationError("%s line %d: %s" % (path, lineno, exc))
    return annots


# Ground truth maps image_id -> PartAnnotation, or None for part-free images.
GroundTruth = dict


def write_ground_truth(path, gt: GroundTruth) -> None:
    with open(path, "w") as fh:
        for image_id in gt:
            annot = gt[image_id]
            if annot is None:
                fh.write(json.dumps({"image_id": image_id, "absent": True}, sort_keys=True) + "\n")
            else:
                fh.write(json.dumps(annot.to_record(), sort_keys=True) + "\n")


def read_ground_truth(path) -> GroundTruth:
    gt: GroundTruth = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            if rec.get("absent"):
                gt[rec["image_id"]] = None
            else:
                annot = PartAnnotation.from_record(rec)
                gt[annot.image_id] = annot
        except (json.JSONDecodeError, KeyError) as exc:
            raise AnnotationError("%s line %d: %s" % (path, lineno, exc))
    return gt
