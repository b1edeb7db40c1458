"""Wire types for the /v1 session service.

Boxes travel as [x, y, w, h] in image pixels, origin top-left. Cross-field
answer rules (which kinds carry a box or label) are enforced by the engine's
Answer type; these models only fix the shapes.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

AnswerKind = Literal[
    "correct", "wrong_location", "wrong_template", "new_template", "part_absent"
]


class QuestionOut(BaseModel):
    image_id: str
    image_url: str | None
    heatmap_url: str
    proposed_template_id: int | None
    proposed_template_label: str | None
    proposed_box: list[float] | None
    predicted_gain: float | None
    step: int


class NextQuestionOut(BaseModel):
    exhausted: bool
    question: QuestionOut | None


class AnswerIn(BaseModel):
    image_id: str
    step: int
    kind: AnswerKind
    box: list[float] | None = Field(default=None, min_length=4, max_length=4)
    template_label: str | None = None
    flipped: bool = False


class TemplateSummary(BaseModel):
    template_id: int
    label: str
    support_count: int
    num_patterns: int


class AogSummary(BaseModel):
    part_name: str
    template_count: int
    templates: list[TemplateSummary]


class AnswerOut(BaseModel):
    loss: float
    revision: int
    annotation_count: int
    aog: AogSummary


class ProgressOut(BaseModel):
    session: str
    dataset_size: int
    asked_count: int
    questions_asked: int
    annotation_count: int
    revision: int
    labels: list[str]
    loss_history: list[float]


class HeatmapOut(BaseModel):
    image_id: str
    image_w: int
    image_h: int
    layer_index: int
    grid_h: int
    grid_w: int
    stride_px: float
    offset_px: float
    values: list[list[float]]  # per-cell mean over the top layer's channels
