/** Grid-to-pixels rendering for the top conv-layer backdrop. */

import type { Heatmap } from "./api";

/** Min-max normalized grid as RGBA bytes (dark blue -> yellow ramp). */
export function heatmapRgba(values: number[][]): Uint8ClampedArray<ArrayBuffer> {
  const h = values.length;
  const w = h > 0 ? values[0].length : 0;
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of values)
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  const span = hi > lo ? hi - lo : 1;
  const out = new Uint8ClampedArray(w * h * 4);
  let i = 0;
  for (const row of values)
    for (const v of row) {
      const t = (v - lo) / span;
      out[i++] = Math.round(255 * t);
      out[i++] = Math.round(200 * t * t + 30 * (1 - t));
      out[i++] = Math.round(90 * (1 - t) + 40);
      out[i++] = 255;
    }
  return out;
}

/** Image-pixel rectangle covered by grid cell (row, col). */
export function cellRect(hm: Heatmap, row: number, col: number): number[] {
  const x = hm.offset_px + col * hm.stride_px - hm.stride_px / 2;
  const y = hm.offset_px + row * hm.stride_px - hm.stride_px / 2;
  return [x, y, hm.stride_px, hm.stride_px];
}
