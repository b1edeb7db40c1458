/** DOM wiring; all decisions live in the pure modules. */

import { ApiClient, type Heatmap } from "./api";
import { allowsFlip, needsLabel } from "./answer";
import { idleDrag, previewBox, reduceDrag, type DragState } from "./canvas";
import { SessionController } from "./controller";
import { fitViewport, toScreen, type Viewport } from "./geometry";
import { heatmapRgba } from "./heatmap";
import { lossPolyline } from "./progress";
import { KIND_ORDER, KIND_TITLES, kindForKey } from "./shortcuts";

const api = new ApiClient("");
const controller = new SessionController(api);

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const kindBox = document.getElementById("kinds")!;
const labelInput = document.getElementById("label") as HTMLInputElement;
const labelList = document.getElementById("label-options") as HTMLDataListElement;
const flipInput = document.getElementById("flip") as HTMLInputElement;
const clearButton = document.getElementById("clear-box") as HTMLButtonElement;
const submitButton = document.getElementById("submit") as HTMLButtonElement;
const banner = document.getElementById("banner")!;
const proposalLine = document.getElementById("proposal")!;
const statsLine = document.getElementById("stats")!;
const templateList = document.getElementById("templates")!;
const lossPath = document.getElementById("loss-path") as unknown as SVGPolylineElement;

let viewport: Viewport = { scale: 1, panX: 0, panY: 0 };
let imageW = 0;
let imageH = 0;
let drag: DragState = idleDrag;
let backdrop: HTMLCanvasElement | HTMLImageElement | null = null;

for (const kind of KIND_ORDER) {
  const row = document.createElement("label");
  row.className = "kind";
  const radio = document.createElement("input");
  radio.type = "radio";
  radio.name = "kind";
  radio.value = kind;
  radio.addEventListener("change", () => {
    controller.state.draft.kind = kind;
    render();
  });
  row.append(radio, document.createTextNode(" " + KIND_TITLES[kind]));
  kindBox.append(row);
}

function heatmapBackdrop(hm: Heatmap): HTMLCanvasElement {
  const cells = document.createElement("canvas");
  cells.width = hm.grid_w;
  cells.height = hm.grid_h;
  cells
    .getContext("2d")!
    .putImageData(new ImageData(heatmapRgba(hm.values), hm.grid_w, hm.grid_h), 0, 0);
  return cells;
}

async function loadBackdrop(): Promise<void> {
  const q = controller.state.question;
  backdrop = null;
  if (q === null) return;
  if (q.image_url !== null) {
    const img = new Image();
    img.src = api.imageUrl(q.image_url);
    await img.decode();
    backdrop = img;
    imageW = img.naturalWidth;
    imageH = img.naturalHeight;
  } else {
    const hm = await api.heatmap(q.image_id);
    backdrop = heatmapBackdrop(hm);
    imageW = hm.image_w;
    imageH = hm.image_h;
  }
  viewport = fitViewport(imageW, imageH, canvas.width, canvas.height);
}

function strokeBox(box: number[], color: string, dashed: boolean): void {
  const a = toScreen({ x: box[0], y: box[1] }, viewport);
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.setLineDash(dashed ? [6, 4] : []);
  ctx.strokeRect(a.x, a.y, box[2] * viewport.scale, box[3] * viewport.scale);
  ctx.setLineDash([]);
}

function render(): void {
  const state = controller.state;
  const q = state.question;
  ctx.fillStyle = "#14171c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (backdrop !== null) {
    ctx.imageSmoothingEnabled = backdrop instanceof HTMLImageElement;
    const origin = toScreen({ x: 0, y: 0 }, viewport);
    ctx.drawImage(backdrop, origin.x, origin.y, imageW * viewport.scale, imageH * viewport.scale);
  }
  if (q?.proposed_box) strokeBox(q.proposed_box, "#e4b44c", true);
  if (state.draft.box) strokeBox(state.draft.box, "#53d769", false);
  const preview = previewBox(drag);
  if (preview) strokeBox(preview, "#53d769", true);

  banner.textContent = state.banner;
  proposalLine.textContent = state.exhausted
    ? "every image has been asked"
    : q === null
      ? "loading"
      : q.proposed_template_label === null
        ? `${q.image_id}: no proposal yet, draw the part`
        : `${q.image_id}: proposed "${q.proposed_template_label}"`;

  const kind = state.draft.kind;
  for (const radio of kindBox.querySelectorAll<HTMLInputElement>("input")) {
    radio.checked = radio.value === kind;
  }
  labelInput.disabled = kind === null || !needsLabel(kind);
  flipInput.disabled = kind === null || !allowsFlip(kind);
  if (flipInput.disabled) flipInput.checked = false;
  clearButton.disabled = state.draft.box === null;
  submitButton.disabled = q === null;
  labelList.replaceChildren(
    ...state.knownLabels.map((l) => {
      const opt = document.createElement("option");
      opt.value = l;
      return opt;
    }),
  );

  const result = state.lastResult;
  if (result !== null) {
    templateList.replaceChildren(
      ...result.aog.templates.map((t) => {
        const li = document.createElement("li");
        li.textContent = `${t.label} (${t.num_patterns} patterns, ${t.support_count} boxes)`;
        return li;
      }),
    );
  }
}

async function refreshProgress(): Promise<void> {
  const p = await api.progress();
  controller.state.knownLabels = p.labels;
  statsLine.textContent =
    `${p.questions_asked}/${p.dataset_size} asked, ` +
    `${p.annotation_count} annotations, revision ${p.revision}`;
  lossPath.setAttribute("points", lossPolyline(p.loss_history, 280, 60));
}

async function advance(): Promise<void> {
  await loadBackdrop();
  await refreshProgress();
  render();
}

canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  drag = reduceDrag(drag, { type: "down", x: e.offsetX, y: e.offsetY }, viewport, imageW, imageH)
    .state;
  render();
});
canvas.addEventListener("pointermove", (e) => {
  if (drag.start === null) return;
  drag = reduceDrag(drag, { type: "move", x: e.offsetX, y: e.offsetY }, viewport, imageW, imageH)
    .state;
  render();
});
canvas.addEventListener("pointerup", (e) => {
  const outcome = reduceDrag(
    drag,
    { type: "up", x: e.offsetX, y: e.offsetY },
    viewport,
    imageW,
    imageH,
  );
  drag = outcome.state;
  if (outcome.box !== null && outcome.box[2] > 0 && outcome.box[3] > 0) {
    controller.state.draft.box = outcome.box;
  }
  render();
});

labelInput.addEventListener("input", () => {
  controller.state.draft.label = labelInput.value;
});
flipInput.addEventListener("change", () => {
  controller.state.draft.flipped = flipInput.checked;
});
clearButton.addEventListener("click", () => {
  controller.state.draft.box = null;
  render();
});
submitButton.addEventListener("click", () => void submitAnswer());

async function submitAnswer(): Promise<void> {
  const outcome = await controller.submit();
  if (outcome === "committed" || outcome === "stale") await advance();
  else render();
}

document.addEventListener("keydown", (e) => {
  if (e.target === labelInput) return;
  const kind = kindForKey(e.key);
  if (kind !== null) {
    controller.state.draft.kind = kind;
    render();
  } else if (e.key === "Enter") {
    void submitAnswer();
  } else if (e.key === "Escape") {
    controller.state.draft.box = null;
    render();
  }
});

void controller.loadNext().then(advance);
