/** Keyboard map: the loop is high-repetition, so 1-5 pick the answer kind. */

import type { AnswerKind } from "./api";

export const KIND_ORDER: AnswerKind[] = [
  "correct",
  "wrong_location",
  "wrong_template",
  "new_template",
  "part_absent",
];

export const KIND_TITLES: Record<AnswerKind, string> = {
  correct: "1 correct",
  wrong_location: "2 right template, fix the box",
  wrong_template: "3 wrong template (box + label, flip if mirrored)",
  new_template: "4 new template (box + fresh label)",
  part_absent: "5 part absent",
};

/** AnswerKind for a keypress, or null if the key is not a shortcut. */
export function kindForKey(key: string): AnswerKind | null {
  if (!/^[1-9]$/.test(key)) return null;
  const index = Number(key) - 1;
  return index < KIND_ORDER.length ? KIND_ORDER[index] : null;
}
