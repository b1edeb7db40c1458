"""Ground-truth-backed answer source for simulated sessions."""

from __future__ import annotations

from ..annotations import GroundTruth
from ..errors import AnnotationError
from .state import Answer, Question


class SimulatedOracle:
    """Answers questions from a ground-truth table.

    Decision order: part-free images get part_absent; a label never annotated
    in the session so far gets new_template; flipped objects get
    wrong_template with the flip flag (confirmation answers cannot carry
    orientation); otherwise the proposal is checked by label and box overlap.
    """

    def __init__(self, gt: GroundTruth, iou_threshold: float = 0.5):
        self.gt = gt
        self.iou_threshold = iou_threshold

    def answer(self, question: Question, known_labels) -> Answer:
        image_id = question.image_id
        if image_id not in self.gt:
            raise AnnotationError("no ground truth for image %r" % image_id)
        truth = self.gt[image_id]
        if truth is None:
            return Answer.part_absent()
        if truth.template_label not in known_labels:
            return Answer.new_template(truth.box, truth.template_label)
        if truth.flipped:
            return Answer.wrong_template(truth.box, truth.template_label, flipped=True)
        if question.proposed_template_label == truth.template_label:
            if (
                question.proposed_box is not None
                and question.proposed_box.iou(truth.box) >= self.iou_threshold
            ):
                return Answer.correct()
            return Answer.wrong_location(truth.box)
        return Answer.wrong_template(truth.box, truth.template_label, flipped=False)
