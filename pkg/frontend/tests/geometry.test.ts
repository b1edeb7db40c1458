import { describe, expect, it } from "vitest";

import {
  boxFromCorners,
  clampBox,
  fitViewport,
  roundBox,
  toImage,
  toScreen,
  zoomAt,
  type Viewport,
} from "../src/geometry";
import { mulberry32, randInt, uniform } from "./rand";

function randomViewport(rand: () => number): Viewport {
  return {
    scale: uniform(rand, 0.3, 8),
    panX: uniform(rand, -400, 400),
    panY: uniform(rand, -400, 400),
  };
}

describe("point transforms", () => {
  it("toImage inverts toScreen", () => {
    const rand = mulberry32(7);
    for (let i = 0; i < 300; i++) {
      const vp = randomViewport(rand);
      const p = { x: uniform(rand, 0, 500), y: uniform(rand, 0, 500) };
      const back = toImage(toScreen(p, vp), vp);
      expect(back.x).toBeCloseTo(p.x, 9);
      expect(back.y).toBeCloseTo(p.y, 9);
    }
  });

  it("box drawing round-trips through any zoom within 1 px", () => {
    const rand = mulberry32(11);
    for (let i = 0; i < 500; i++) {
      const vp = randomViewport(rand);
      const box = [
        randInt(rand, 0, 200),
        randInt(rand, 0, 200),
        randInt(rand, 1, 120),
        randInt(rand, 1, 120),
      ];
      const a = toScreen({ x: box[0], y: box[1] }, vp);
      const b = toScreen({ x: box[0] + box[2], y: box[1] + box[3] }, vp);
      const redrawn = roundBox(boxFromCorners(toImage(a, vp), toImage(b, vp)));
      for (let k = 0; k < 4; k++) expect(Math.abs(redrawn[k] - box[k])).toBeLessThanOrEqual(1);
    }
  });
});

describe("boxFromCorners", () => {
  it("is independent of drag direction", () => {
    const a = { x: 10, y: 40 };
    const b = { x: 30, y: 20 };
    expect(boxFromCorners(a, b)).toEqual([10, 20, 20, 20]);
    expect(boxFromCorners(b, a)).toEqual([10, 20, 20, 20]);
  });
});

describe("clampBox", () => {
  it("keeps interior boxes intact", () => {
    expect(clampBox([10, 20, 30, 40], 100, 100)).toEqual([10, 20, 30, 40]);
  });

  it("cuts overhang without moving the opposite edge", () => {
    expect(clampBox([-10, 90, 30, 40], 100, 100)).toEqual([0, 90, 20, 10]);
    expect(clampBox([80, -5, 40, 20], 100, 100)).toEqual([80, 0, 20, 15]);
  });

  it("never returns negative sizes", () => {
    const [, , w, h] = clampBox([150, 150, 30, 40], 100, 100);
    expect(w).toBe(0);
    expect(h).toBe(0);
  });
});

describe("viewport helpers", () => {
  it("fitViewport centers the image", () => {
    const vp = fitViewport(100, 50, 200, 200);
    expect(vp.scale).toBe(2);
    expect(vp.panX).toBe(0);
    expect(vp.panY).toBe(50);
  });

  it("zoomAt keeps the pixel under the cursor fixed", () => {
    const rand = mulberry32(3);
    for (let i = 0; i < 100; i++) {
      const vp = randomViewport(rand);
      const cursor = { x: uniform(rand, 0, 600), y: uniform(rand, 0, 600) };
      const before = toImage(cursor, vp);
      const after = toImage(cursor, zoomAt(vp, cursor, uniform(rand, 0.5, 3)));
      expect(after.x).toBeCloseTo(before.x, 9);
      expect(after.y).toBeCloseTo(before.y, 9);
    }
  });
});
