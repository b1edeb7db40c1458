import { describe, expect, it } from "vitest";

import { idleDrag, previewBox, reduceDrag, type DragState } from "../src/canvas";
import { toScreen, type Viewport } from "../src/geometry";

const FLAT: Viewport = { scale: 1, panX: 0, panY: 0 };
const ZOOMED: Viewport = { scale: 2.5, panX: 30, panY: -12 };

function drag(vp: Viewport, from: [number, number], to: [number, number]) {
  const a = toScreen({ x: from[0], y: from[1] }, vp);
  const b = toScreen({ x: to[0], y: to[1] }, vp);
  let state: DragState = idleDrag;
  let out = reduceDrag(state, { type: "down", x: a.x, y: a.y }, vp, 128, 128);
  state = out.state;
  out = reduceDrag(state, { type: "move", x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 }, vp, 128, 128);
  state = out.state;
  return reduceDrag(state, { type: "up", x: b.x, y: b.y }, vp, 128, 128);
}

describe("reduceDrag", () => {
  it("down then up yields the rounded image-space box", () => {
    const out = drag(FLAT, [10, 20], [50, 44]);
    expect(out.box).toEqual([10, 20, 40, 24]);
    expect(out.state).toEqual(idleDrag);
  });

  it("works the same under zoom and pan", () => {
    const out = drag(ZOOMED, [10, 20], [50, 44]);
    expect(out.box).toEqual([10, 20, 40, 24]);
  });

  it("a reversed drag gives the same box", () => {
    const out = drag(ZOOMED, [50, 44], [10, 20]);
    expect(out.box).toEqual([10, 20, 40, 24]);
  });

  it("clamps the finished box to the image", () => {
    const out = drag(FLAT, [-30, 100], [40, 500]);
    expect(out.box).toEqual([0, 100, 40, 28]);
  });

  it("move before down is ignored", () => {
    const out = reduceDrag(idleDrag, { type: "move", x: 5, y: 5 }, FLAT, 128, 128);
    expect(out.state).toEqual(idleDrag);
    expect(out.box).toBeNull();
  });

  it("up without a drag produces no box", () => {
    const out = reduceDrag(idleDrag, { type: "up", x: 5, y: 5 }, FLAT, 128, 128);
    expect(out.box).toBeNull();
  });

  it("cancel abandons the drag", () => {
    const mid = reduceDrag(idleDrag, { type: "down", x: 5, y: 5 }, FLAT, 128, 128);
    const out = reduceDrag(mid.state, { type: "cancel" }, FLAT, 128, 128);
    expect(out.state).toEqual(idleDrag);
    expect(out.box).toBeNull();
    expect(previewBox(out.state)).toBeNull();
  });
});

describe("previewBox", () => {
  it("tracks the live rectangle while dragging", () => {
    let out = reduceDrag(idleDrag, { type: "down", x: 10, y: 10 }, FLAT, 128, 128);
    expect(previewBox(out.state)).toEqual([10, 10, 0, 0]);
    out = reduceDrag(out.state, { type: "move", x: 4, y: 30 }, FLAT, 128, 128);
    expect(previewBox(out.state)).toEqual([4, 10, 6, 20]);
  });

  it("is empty when idle", () => {
    expect(previewBox(idleDrag)).toBeNull();
  });
});
