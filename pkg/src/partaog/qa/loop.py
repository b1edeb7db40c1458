"""Simulated annotate-ask loop and its reproducible trace."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..aog.model import AndOrGraph
from ..errors import ConfigError
from .state import QaSession, Question


def random_selector(session: QaSession) -> Question:
    """Uniform-random baseline policy; draws from the session's seeded stream."""
    unasked = session.unasked_ids()
    image_id = unasked[int(session.rng.integers(len(unasked)))]
    return session.make_question(image_id)


def active_selector(session: QaSession) -> Question:
    return session.select_question()


@dataclass
class RunTrace:
    rows: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)  # annotation count -> AndOrGraph

    @property
    def questions_asked(self) -> int:
        return len(self.rows)

    @property
    def annotations_placed(self) -> int:
        return self.rows[-1]["annotations"] if self.rows else 0


def run_loop(
    session: QaSession,
    oracle,
    budget: int,
    selector=None,
    snapshot_budgets=(),
) -> RunTrace:
    """Ask and apply answers until `budget` annotations land or images run out.

    Confirmation and part-absent answers consume questions but not budget.
    The trace rows are a pure function of (dataset, config, seed): no wall
    time, no environment.
    """
    if budget < 1:
        raise ConfigError("budget must be >= 1")
    if selector is None:
        selector = active_selector
    trace = RunTrace()
    snapshot_budgets = set(snapshot_budgets)
    while len(session.annotations) < budget and session.unasked_ids():
        question = selector(session)
        answer = oracle.answer(question, session.annotated_labels())
        session.apply_answer(question, answer)
        count = len(session.annotations)
        trace.rows.append(
            {
                "step": question.step,
                "image_id": question.image_id,
                "proposed_template_id": question.proposed_template_id,
                "proposed_box": None
                if question.proposed_box is None
                else question.proposed_box.to_list(),
                "predicted_gain": question.predicted_gain,
                "answer": answer.to_dict(),
                "annotations": count,
                "templates": len(session.aog),
                "loss": session.loss_history[-1],
            }
        )
        if count in snapshot_budgets and count not in trace.snapshots:
            trace.snapshots[count] = session.aog
    return trace


def write_trace(trace: RunTrace, path) -> None:
    with open(path, "w") as fh:
        for row in trace.rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
