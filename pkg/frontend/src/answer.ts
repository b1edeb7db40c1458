/** Draft answer state and the rules for when it may be submitted. */

import type { AnswerKind, AnswerPayload, Question } from "./api";

export interface Draft {
  kind: AnswerKind | null;
  box: number[] | null;
  label: string;
  flipped: boolean;
}

export function emptyDraft(): Draft {
  return { kind: null, box: null, label: "", flipped: false };
}

export const BOX_KINDS: AnswerKind[] = ["wrong_location", "wrong_template", "new_template"];
export const LABEL_KINDS: AnswerKind[] = ["wrong_template", "new_template"];

export function needsBox(kind: AnswerKind): boolean {
  return BOX_KINDS.includes(kind);
}

export function needsLabel(kind: AnswerKind): boolean {
  return LABEL_KINDS.includes(kind);
}

export function allowsFlip(kind: AnswerKind): boolean {
  return kind === "wrong_template";
}

export interface Verdict {
  ok: boolean;
  message: string;
}

/** One submittable answer per question; box for 2-4 only, label for 3-4 only. */
export function validate(draft: Draft, knownLabels: string[]): Verdict {
  if (draft.kind === null) return { ok: false, message: "pick one of the five answers" };
  const label = draft.label.trim();
  if (needsBox(draft.kind)) {
    if (draft.box === null) return { ok: false, message: "this answer needs a part box" };
    if (draft.box[2] <= 0 || draft.box[3] <= 0)
      return { ok: false, message: "the drawn box is empty" };
  } else if (draft.box !== null) {
    return { ok: false, message: "this answer does not take a box; clear it first" };
  }
  if (needsLabel(draft.kind)) {
    if (label === "") return { ok: false, message: "this answer needs a template label" };
    if (draft.kind === "wrong_template" && !knownLabels.includes(label))
      return { ok: false, message: `no template "${label}" yet; use new template` };
    if (draft.kind === "new_template" && knownLabels.includes(label))
      return { ok: false, message: `template "${label}" already exists; pick it instead` };
  } else if (label !== "") {
    return { ok: false, message: "this answer does not take a label; clear it first" };
  }
  if (draft.flipped && !allowsFlip(draft.kind))
    return { ok: false, message: "the flip mark only applies to a wrong-template answer" };
  return { ok: true, message: "" };
}

/** Exactly the user's inputs plus the question identity; nothing fabricated. */
export function buildPayload(question: Question, draft: Draft): AnswerPayload {
  if (draft.kind === null) throw new Error("no answer picked");
  const payload: AnswerPayload = {
    image_id: question.image_id,
    step: question.step,
    kind: draft.kind,
  };
  if (needsBox(draft.kind) && draft.box !== null) payload.box = draft.box;
  if (needsLabel(draft.kind)) payload.template_label = draft.label.trim();
  if (allowsFlip(draft.kind)) payload.flipped = draft.flipped;
  return payload;
}
