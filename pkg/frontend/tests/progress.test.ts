import { describe, expect, it } from "vitest";

import { lossPolyline } from "../src/progress";

describe("lossPolyline", () => {
  it("is empty with no history", () => {
    expect(lossPolyline([], 280, 60)).toBe("");
  });

  it("centers a single point", () => {
    expect(lossPolyline([3.5], 280, 60)).toBe("140.0,30.0");
  });

  it("spans the full width and maps min to the bottom, max to the top", () => {
    const points = lossPolyline([5, 2, 8], 280, 60).split(" ");
    expect(points).toHaveLength(3);
    expect(points[0]).toBe("0.0,30.0");
    expect(points[1]).toBe("140.0,60.0");
    expect(points[2]).toBe("280.0,0.0");
  });

  it("a flat history draws a flat line, no divide by zero", () => {
    const points = lossPolyline([4, 4, 4], 300, 60).split(" ");
    const ys = points.map((p) => p.split(",")[1]);
    expect(new Set(ys).size).toBe(1);
    expect(Number.isFinite(Number(ys[0]))).toBe(true);
  });
});
