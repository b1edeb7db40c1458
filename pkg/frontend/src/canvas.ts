/** Pure pointer-drag reducer for drawing one box in image space. */

import { boxFromCorners, clampBox, roundBox, toImage, type Point, type Viewport } from "./geometry";

export interface DragState {
  start: Point | null;
  current: Point | null;
}

export const idleDrag: DragState = { start: null, current: null };

export type DragEvent =
  | { type: "down"; x: number; y: number }
  | { type: "move"; x: number; y: number }
  | { type: "up"; x: number; y: number }
  | { type: "cancel" };

export interface DragOutcome {
  state: DragState;
  /** Set on "up": the finished box in whole image pixels, clamped to the image. */
  box: number[] | null;
}

export function reduceDrag(
  state: DragState,
  event: DragEvent,
  vp: Viewport,
  imageW: number,
  imageH: number,
): DragOutcome {
  if (event.type === "cancel") return { state: idleDrag, box: null };
  const p = toImage({ x: event.x, y: event.y }, vp);
  if (event.type === "down") return { state: { start: p, current: p }, box: null };
  if (state.start === null) return { state, box: null };
  if (event.type === "move") return { state: { start: state.start, current: p }, box: null };
  const box = roundBox(clampBox(boxFromCorners(state.start, p), imageW, imageH));
  return { state: idleDrag, box };
}

/** The in-progress rectangle to preview while dragging, image space. */
export function previewBox(state: DragState): number[] | null {
  if (state.start === null || state.current === null) return null;
  return boxFromCorners(state.start, state.current);
}
