import { describe, expect, it } from "vitest";

import { buildPayload, emptyDraft, validate, type Draft } from "../src/answer";
import type { Question } from "../src/api";

const KNOWN = ["frontal", "profile"];

const QUESTION: Question = {
  image_id: "img_0042",
  image_url: null,
  heatmap_url: "/v1/heatmap/img_0042",
  proposed_template_id: 1,
  proposed_template_label: "profile",
  proposed_box: [40, 40, 60, 60],
  predicted_gain: 0.25,
  step: 9,
};

function draft(parts: Partial<Draft>): Draft {
  return { ...emptyDraft(), ...parts };
}

describe("validate", () => {
  it("requires picking one of the five answers", () => {
    expect(validate(emptyDraft(), KNOWN).ok).toBe(false);
  });

  it("correct and part_absent submit bare", () => {
    expect(validate(draft({ kind: "correct" }), KNOWN).ok).toBe(true);
    expect(validate(draft({ kind: "part_absent" }), KNOWN).ok).toBe(true);
  });

  it("forbids a box on correct and part_absent", () => {
    const box = [1, 2, 3, 4];
    expect(validate(draft({ kind: "correct", box }), KNOWN).ok).toBe(false);
    expect(validate(draft({ kind: "part_absent", box }), KNOWN).ok).toBe(false);
  });

  it("requires a box on the three box answers", () => {
    for (const kind of ["wrong_location", "wrong_template", "new_template"] as const) {
      expect(validate(draft({ kind, label: "frontal" }), KNOWN).ok).toBe(false);
    }
  });

  it("rejects an empty drawn box", () => {
    expect(validate(draft({ kind: "wrong_location", box: [5, 5, 0, 3] }), KNOWN).ok).toBe(false);
  });

  it("wrong_location takes no label", () => {
    const box = [1, 2, 3, 4];
    expect(validate(draft({ kind: "wrong_location", box }), KNOWN).ok).toBe(true);
    expect(validate(draft({ kind: "wrong_location", box, label: "frontal" }), KNOWN).ok).toBe(
      false,
    );
  });

  it("wrong_template needs an existing label", () => {
    const box = [1, 2, 3, 4];
    expect(validate(draft({ kind: "wrong_template", box, label: "frontal" }), KNOWN).ok).toBe(
      true,
    );
    expect(validate(draft({ kind: "wrong_template", box, label: "novel" }), KNOWN).ok).toBe(false);
    expect(validate(draft({ kind: "wrong_template", box }), KNOWN).ok).toBe(false);
  });

  it("new_template needs a fresh label", () => {
    const box = [1, 2, 3, 4];
    expect(validate(draft({ kind: "new_template", box, label: "novel" }), KNOWN).ok).toBe(true);
    expect(validate(draft({ kind: "new_template", box, label: "frontal" }), KNOWN).ok).toBe(false);
    expect(validate(draft({ kind: "new_template", box }), KNOWN).ok).toBe(false);
  });

  it("only wrong_template may carry the flip mark", () => {
    const box = [1, 2, 3, 4];
    expect(
      validate(draft({ kind: "wrong_template", box, label: "frontal", flipped: true }), KNOWN).ok,
    ).toBe(true);
    expect(validate(draft({ kind: "correct", flipped: true }), KNOWN).ok).toBe(false);
    expect(
      validate(draft({ kind: "new_template", box, label: "novel", flipped: true }), KNOWN).ok,
    ).toBe(false);
  });
});

describe("buildPayload", () => {
  it("sends exactly the user's inputs plus the question identity", () => {
    expect(buildPayload(QUESTION, draft({ kind: "correct" }))).toEqual({
      image_id: "img_0042",
      step: 9,
      kind: "correct",
    });
    expect(buildPayload(QUESTION, draft({ kind: "part_absent" }))).toEqual({
      image_id: "img_0042",
      step: 9,
      kind: "part_absent",
    });
    expect(
      buildPayload(QUESTION, draft({ kind: "wrong_location", box: [12, 8, 40, 30] })),
    ).toEqual({
      image_id: "img_0042",
      step: 9,
      kind: "wrong_location",
      box: [12, 8, 40, 30],
    });
    expect(
      buildPayload(
        QUESTION,
        draft({ kind: "wrong_template", box: [12, 8, 40, 30], label: "frontal", flipped: true }),
      ),
    ).toEqual({
      image_id: "img_0042",
      step: 9,
      kind: "wrong_template",
      box: [12, 8, 40, 30],
      template_label: "frontal",
      flipped: true,
    });
    expect(
      buildPayload(QUESTION, draft({ kind: "new_template", box: [0, 0, 24, 24], label: "novel" })),
    ).toEqual({
      image_id: "img_0042",
      step: 9,
      kind: "new_template",
      box: [0, 0, 24, 24],
      template_label: "novel",
    });
  });

  it("never fabricates extra fields", () => {
    const bare = buildPayload(QUESTION, draft({ kind: "correct" }));
    expect(Object.keys(bare).sort()).toEqual(["image_id", "kind", "step"]);
    const full = buildPayload(
      QUESTION,
      draft({ kind: "wrong_template", box: [1, 2, 3, 4], label: "frontal" }),
    );
    expect(Object.keys(full).sort()).toEqual([
      "box",
      "flipped",
      "image_id",
      "kind",
      "step",
      "template_label",
    ]);
    expect(full.flipped).toBe(false);
  });

  it("trims the label as the validator does", () => {
    const payload = buildPayload(
      QUESTION,
      draft({ kind: "new_template", box: [1, 2, 3, 4], label: "  novel " }),
    );
    expect(payload.template_label).toBe("novel");
  });
});
