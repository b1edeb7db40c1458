/** Screen/image coordinate transforms; boxes are [x, y, w, h] in image pixels. */

export interface Viewport {
  scale: number;
  panX: number;
  panY: number;
}

export interface Point {
  x: number;
  y: number;
}

export function toScreen(p: Point, vp: Viewport): Point {
  return { x: p.x * vp.scale + vp.panX, y: p.y * vp.scale + vp.panY };
}

export function toImage(p: Point, vp: Viewport): Point {
  return { x: (p.x - vp.panX) / vp.scale, y: (p.y - vp.panY) / vp.scale };
}

/** Axis-aligned box from two image-space corners, any drag direction. */
export function boxFromCorners(a: Point, b: Point): number[] {
  const x = Math.min(a.x, b.x);
  const y = Math.min(a.y, b.y);
  return [x, y, Math.abs(a.x - b.x), Math.abs(a.y - b.y)];
}

/** Snap to whole image pixels; what actually goes over the wire. */
export function roundBox(box: number[]): number[] {
  return box.map(Math.round);
}

/** Intersect a box with [0, w] x [0, h]; edges stay where the user put them. */
export function clampBox(box: number[], imageW: number, imageH: number): number[] {
  const x0 = Math.min(Math.max(box[0], 0), imageW);
  const y0 = Math.min(Math.max(box[1], 0), imageH);
  const x1 = Math.min(Math.max(box[0] + box[2], 0), imageW);
  const y1 = Math.min(Math.max(box[1] + box[3], 0), imageH);
  return [x0, y0, Math.max(x1 - x0, 0), Math.max(y1 - y0, 0)];
}

/** Viewport that fits an image into a canvas, centered, integer-friendly. */
export function fitViewport(
  imageW: number,
  imageH: number,
  canvasW: number,
  canvasH: number,
): Viewport {
  const scale = Math.min(canvasW / imageW, canvasH / imageH);
  return {
    scale,
    panX: (canvasW - imageW * scale) / 2,
    panY: (canvasH - imageH * scale) / 2,
  };
}

/** Zoom about a fixed screen point so the pixel under the cursor stays put. */
export function zoomAt(vp: Viewport, screenPoint: Point, factor: number): Viewport {
  const anchor = toImage(screenPoint, vp);
  const scale = vp.scale * factor;
  return {
    scale,
    panX: screenPoint.x - anchor.x * scale,
    panY: screenPoint.y - anchor.y * scale,
  };
}
