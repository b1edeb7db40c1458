"""Question-answering session: priors, model beliefs, and answer bookkeeping.

The session holds everything the active loop needs between questions: the
current graph, per-image priors P(y=+1|I), the model's belief Q derived from
parse scores, parse caches, and the append-only answer log. All mutation goes
through apply_answer, which is the transaction boundary for persistence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ..aog.config import MiningConfig
from ..aog.mining import grow_aog
from ..aog.model import AndOrGraph
from ..aog.parsing import parse_many
from ..annotations import PartAnnotation, check_box_within
from ..errors import AnnotationError, ConfigError, SessionStateError
from ..features.stats import channel_stats
from ..geometry import Box
from .selection import descriptor_weights, distance_matrix, image_descriptor

ANSWER_KINDS = ("correct", "wrong_location", "wrong_template", "new_template", "part_absent")


@dataclass(frozen=True)
class QaConfig:
    part_name: str = "part"
    alpha: float = 4.0
    beta: float = 1.0
    epsilon: float = 1e-6
    mode: str = "simplified"  # "simplified" drops Z and the negative-label term
    first_question: str = "lowest"  # or "random"
    seed: int = 0
    iou_threshold: float = 0.5
    mining: MiningConfig = field(default_factory=MiningConfig)

    def __post_init__(self):
        if self.mode not in ("simplified", "full_kl"):
            raise ConfigError("mode must be 'simplified' or 'full_kl', got %r" % self.mode)
        if self.first_question not in ("lowest", "random"):
            raise ConfigError("first_question must be 'lowest' or 'random'")
        if not (0.0 < self.epsilon < 0.5):
            raise ConfigError("epsilon must lie in (0, 0.5)")
        if self.beta <= 0 or self.alpha < 0:
            raise ConfigError("beta must be positive and alpha non-negative")

    def to_dict(self) -> dict:
        return {
            "part_name": self.part_name,
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "first_question": self.first_question,
            "seed": self.seed,
            "iou_threshold": self.iou_threshold,
            "mining": self.mining.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "QaConfig":
        d = dict(d)
        d["mining"] = MiningConfig.from_dict(d["mining"])
        return QaConfig(**d)


@dataclass(frozen=True)
class Question:
    image_id: str
    proposed_template_id: int | None
    proposed_template_label: str | None
    proposed_box: Box | None
    predicted_gain: float | None
    step: int

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "proposed_template_id": self.proposed_template_id,
            "proposed_template_label": self.proposed_template_label,
            "proposed_box": None if self.proposed_box is None else self.proposed_box.to_list(),
            "predicted_gain": self.predicted_gain,
            "step": self.step,
        }

    @staticmethod
    def from_dict(d: dict) -> "Question":
        box = d.get("proposed_box")
        return Question(
            image_id=d["image_id"],
            proposed_template_id=d.get("proposed_template_id"),
            proposed_template_label=d.get("proposed_template_label"),
            proposed_box=None if box is None else Box.from_list(box),
            predicted_gain=d.get("predicted_gain"),
            step=d["step"],
        )


@dataclass(frozen=True)
class Answer:
    """One of the five annotator responses.

    correct          confirmation, nothing else
    wrong_location   box
    wrong_template   box + existing template label + optional flip flag
    new_template     box + previously unseen template label
    part_absent      the target part does not appear in the image
    """

    kind: str
    box: Box | None = None
    template_label: str | None = None
    flipped: bool = False

    def __post_init__(self):
        if self.kind not in ANSWER_KINDS:
            raise AnnotationError("unknown answer kind %r" % self.kind)
        needs_box = self.kind in ("wrong_location", "wrong_template", "new_template")
        if needs_box and self.box is None:
            raise AnnotationError("answer %r requires a box" % self.kind)
        if not needs_box and self.box is not None:
            raise AnnotationError("answer %r must not carry a box" % self.kind)
        needs_label = self.kind in ("wrong_template", "new_template")
        if needs_label and not self.template_label:
            raise AnnotationError("answer %r requires a template label" % self.kind)
        if not needs_label and self.template_label is not None:
            raise AnnotationError("answer %r must not carry a template label" % self.kind)
        if self.flipped and self.kind != "wrong_template":
            raise AnnotationError("only wrong_template answers may set the flip flag")

    @staticmethod
    def correct() -> "Answer":
        return Answer("correct")

    @staticmethod
    def wrong_location(box: Box) -> "Answer":
        return Answer("wrong_location", box=box)

    @staticmethod
    def wrong_template(box: Box, template_label: str, flipped: bool = False) -> "Answer":
        return Answer("wrong_template", box=box, template_label=template_label, flipped=flipped)

    @staticmethod
    def new_template(box: Box, template_label: str) -> "Answer":
        return Answer("new_template", box=box, template_label=template_label)

    @staticmethod
    def part_absent() -> "Answer":
        return Answer("part_absent")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.box is not None:
            d["box"] = self.box.to_list()
        if self.template_label is not None:
            d["template_label"] = self.template_label
        if self.kind == "wrong_template":
            d["flipped"] = self.flipped
        return d

    @staticmethod
    def from_dict(d: dict) -> "Answer":
        box = d.get("box")
        return Answer(
            kind=d["kind"],
            box=None if box is None else Box.from_list(box),
            template_label=d.get("template_label"),
            flipped=bool(d.get("flipped", False)),
        )


@dataclass(frozen=True)
class AnswerRecord:
    step: int
    question: Question
    answer: Answer
    asked_at: str

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "question": self.question.to_dict(),
            "answer": self.answer.to_dict(),
            "asked_at": self.asked_at,
        }

    @staticmethod
    def from_dict(d: dict) -> "AnswerRecord":
        return AnswerRecord(
            step=d["step"],
            question=Question.from_dict(d["question"]),
            answer=Answer.from_dict(d["answer"]),
            asked_at=d["asked_at"],
        )


def kl_loss(priors: dict, q: dict, lam: float) -> float:
    """lam * sum_I sum_y P(y|I) log(P(y|I) / Q(y|I)) over y in {+1, -1}.

    Zero P terms contribute zero; Q values must lie strictly inside (0, 1).
    """
    if set(priors) != set(q):
        raise ValueError("P and Q must cover the same image ids")
    total = 0.0
    for image_id in sorted(priors):
        p = priors[image_id]
        qv = q[image_id]
        if not (0.0 < qv < 1.0):
            raise ValueError("Q[%r] = %r outside (0, 1)" % (image_id, qv))
        if not (0.0 <= p <= 1.0):
            raise ValueError("P[%r] = %r outside [0, 1]" % (image_id, p))
        if p > 0.0:
            total += p * math.log(p / qv)
        if p < 1.0:
            total += (1.0 - p) * math.log((1.0 - p) / (1.0 - qv))
    return lam * total


class QaSession:
    """Single-writer QA session over one dataset.

    All id-indexed state iterates in sorted image-id order, which is what
    makes traces reproducible.
    """

    def __init__(self, store, config: QaConfig, stats=None):
        self.store = store
        self.config = config
        self.stats = stats if stats is not None else channel_stats(store)
        store.set_stats(self.stats)
        self.ids = sorted(store.ids())
        self._id_index = {image_id: i for i, image_id in enumerate(self.ids)}
        self.aog = AndOrGraph(
            part_name=config.part_name,
            templates=(),
            normalization=self.stats,
            mining_config=config.mining,
        )
        self.asked: set[str] = set()
        self.asked_priors: dict[str, float] = {}
        self.annotations: list[PartAnnotation] = []
        self.answer_log: list[AnswerRecord] = []
        self.loss_history: list[float] = []
        self.revision = 0
        self.rng = np.random.default_rng(config.seed)
        self.priors: dict[str, float] = {}
        self.q_scores: dict[str, float] = {}
        self.parses = None
        self.scores: dict[str, float] | None = None
        self._phi = None
        self._dist = None
        self._assign = None
        self._update_priors()
        self.estimate_q()

    # --- P and Q ------------------------------------------------------------

    def _update_priors(self) -> None:
        """Asked ids keep their answer-derived prior; the rest get the asked mean."""
        if self.asked_priors:
            vals = [self.asked_priors[i] for i in sorted(self.asked_priors)]
            fill = sum(vals) / len(vals)
        else:
            fill = 1.0
        self.priors = {
            image_id: self.asked_priors.get(image_id, fill) for image_id in self.ids
        }

    def _full_q(self, scores: dict | None) -> dict[str, float]:
        eps = self.config.epsilon
        if scores is None:
            return {image_id: eps for image_id in self.ids}
        beta = self.config.beta
        top = max(scores[i] for i in self.ids)
        return {
            image_id: min(1.0 - eps, max(eps, math.exp(beta * (scores[image_id] - top))))
            for image_id in self.ids
        }

    def estimate_q(self) -> dict[str, float]:
        """Refresh parse caches and the Q map for the current graph."""
        if len(self.aog) == 0:
            self.parses = None
            self.scores = None
            self._assign = None
            self.q_scores = {image_id: self.config.epsilon for image_id in self.ids}
            return self.q_scores
        self.parses = parse_many(self.store, self.aog, self.stats, ids=self.ids)
        self.scores = {image_id: self.parses[image_id].part_score for image_id in self.ids}
        self._assign = np.array(
            [self.parses[image_id].template_id for image_id in self.ids], dtype=np.int64
        )
        if self.config.mode == "full_kl":
            self.q_scores = self._full_q(self.scores)
        else:
            self.q_scores = {
                image_id: self.config.beta * self.scores[image_id] for image_id in self.ids
            }
        return self.q_scores

    def report_loss(self) -> float:
        """Monitoring loss: KL of P against the normalized Q, in either mode."""
        return kl_loss(self.priors, self._full_q(self.scores), 1.0 / len(self.ids))

    # --- descriptors ----------------------------------------------------------

    def _descriptors(self) -> np.ndarray:
        if self._phi is None:
            weights = descriptor_weights(self.store, self.stats)
            self._phi = np.stack(
                [image_descriptor(self.store.get(i), weights) for i in self.ids]
            )
        return self._phi

    def _dist_matrix(self) -> np.ndarray:
        if self._dist is None:
            self._dist = distance_matrix(self._descriptors())
        return self._dist

    # --- selection ------------------------------------------------------------

    def annotated_ids(self) -> list[str]:
        return sorted({a.image_id for a in self.annotations})

    def annotated_labels(self) -> set[str]:
        return {a.template_label for a in self.annotations}

    def unasked_ids(self) -> list[str]:
        return [image_id for image_id in self.ids if image_id not in self.asked]

    def _priors_vector(self) -> np.ndarray:
        return np.array([self.priors[i] for i in self.ids], dtype=np.float64)

    def _similarity_row(self, image_id: str) -> np.ndarray:
        """exp(-alpha * dist) against every image; template mismatches are exactly 0."""
        idx = self._id_index[image_id]
        sim = np.exp(-self.config.alpha * self._dist_matrix()[idx])
        if self._assign is not None:
            sim = np.where(self._assign == self._assign[idx], sim, 0.0)
        return sim

    def predict_gain(self, image_id: str) -> float:
        """Predicted KL reduction from asking about image_id."""
        if image_id in self.asked:
            raise SessionStateError("image %r was already asked" % image_id)
        annotated = self.annotated_ids()
        if not annotated or self.scores is None:
            raise SessionStateError("predict_gain needs at least one annotation")
        lam = 1.0 / len(self.ids)
        mean_l = sum(self.scores[i] for i in annotated) / len(annotated)
        delta_l = mean_l - self.scores[image_id]
        sim = self._similarity_row(image_id)
        if self.config.mode == "simplified":
            return lam * self.config.beta * delta_l * float(np.dot(self._priors_vector(), sim))
        predicted = {
            other: self.scores[other] + delta_l * float(sim[self._id_index[other]])
            for other in self.ids
        }
        q_now = self._full_q(self.scores)
        q_new = self._full_q(predicted)
        return kl_loss(self.priors, q_now, lam) - kl_loss(self.priors, q_new, lam)

    def make_question(self, image_id: str, predicted_gain: float | None = None) -> Question:
        if image_id in self.asked:
            raise SessionStateError("image %r was already asked" % image_id)
        pg = self.parses[image_id] if self.parses is not None else None
        template_label = None
        if pg is not None:
            template_label = self.aog.template_by_id(pg.template_id).label
        return Question(
            image_id=image_id,
            proposed_template_id=None if pg is None else pg.template_id,
            proposed_template_label=template_label,
            proposed_box=None if pg is None else pg.part_box,
            predicted_gain=predicted_gain,
            step=self.revision,
        )

    def select_question(self) -> Question:
        unasked = self.unasked_ids()
        if not unasked:
            raise SessionStateError("every image has been asked")
        if not self.annotations:
            if self.config.first_question == "random":
                image_id = unasked[int(self.rng.integers(len(unasked)))]
            else:
                image_id = unasked[0]
            return self.make_question(image_id)
        best_id = None
        best_gain = None
        for image_id in unasked:
            gain = self.predict_gain(image_id)
            if best_gain is None or gain > best_gain:
                best_id, best_gain = image_id, gain
        return self.make_question(best_id, best_gain)

    # --- answers ----------------------------------------------------------------

    def _annotation_from_answer(self, question: Question, answer: Answer) -> PartAnnotation:
        image_w, image_h = self.store.image_size(question.image_id)
        if answer.kind == "wrong_location":
            if question.proposed_template_label is None:
                raise SessionStateError(
                    "wrong_location confirms the proposed template, but none was proposed"
                )
            label, flipped = question.proposed_template_label, False
        elif answer.kind == "wrong_template":
            if self.aog.template_by_label(answer.template_label) is None:
                raise AnnotationError(
                    "wrong_template label %r does not exist yet; use new_template"
                    % answer.template_label
                )
            label, flipped = answer.template_label, answer.flipped
        else:  # new_template
            if self.aog.template_by_label(answer.template_label) is not None:
                raise AnnotationError(
                    "new_template label %r already exists" % answer.template_label
                )
            label, flipped = answer.template_label, False
        annot = PartAnnotation(
            image_id=question.image_id, box=answer.box, template_label=label, flipped=flipped
        )
        check_box_within(annot, image_w, image_h)
        return annot

    def apply_answer(self, question: Question, answer: Answer) -> None:
        """Commit one question/answer exchange; the only state-mutating entry point."""
        image_id = question.image_id
        if image_id not in self._id_index:
            raise SessionStateError("image %r is not part of this session" % image_id)
        if image_id in self.asked:
            raise SessionStateError("image %r was already answered" % image_id)
        if question.step != self.revision:
            raise SessionStateError(
                "stale question (step %d, session at %d)" % (question.step, self.revision)
            )
        if answer.kind in ("wrong_location", "wrong_template", "new_template"):
            annot = self._annotation_from_answer(question, answer)
        else:
            annot = None

        self.asked.add(image_id)
        self.asked_priors[image_id] = 0.0 if answer.kind == "part_absent" else 1.0
        self._update_priors()
        if annot is not None:
            self.annotations.append(annot)
            label_annots = [a for a in self.annotations if a.template_label == annot.template_label]
            self.aog = grow_aog(
                self.aog, annot, label_annots, self.store, self.stats, self.config.mining
            )
            self.estimate_q()
        self.answer_log.append(
            AnswerRecord(
                step=self.revision,
                question=question,
                answer=answer,
                asked_at=datetime.now(timezone.utc).isoformat(),
            )
        )
        self.loss_history.append(self.report_loss())
        self.revision += 1
