/** Typed client for the /v1 session endpoints. */

export type AnswerKind =
  | "correct"
  | "wrong_location"
  | "wrong_template"
  | "new_template"
  | "part_absent";

export interface Question {
  image_id: string;
  image_url: string | null;
  heatmap_url: string;
  proposed_template_id: number | null;
  proposed_template_label: string | null;
  proposed_box: number[] | null;
  predicted_gain: number | null;
  step: number;
}

export interface NextQuestion {
  exhausted: boolean;
  question: Question | null;
}

export interface AnswerPayload {
  image_id: string;
  step: number;
  kind: AnswerKind;
  box?: number[];
  template_label?: string;
  flipped?: boolean;
}

export interface TemplateSummary {
  template_id: number;
  label: string;
  support_count: number;
  num_patterns: number;
}

export interface AnswerResult {
  loss: number;
  revision: number;
  annotation_count: number;
  aog: { part_name: string; template_count: number; templates: TemplateSummary[] };
}

export interface Progress {
  session: string;
  dataset_size: number;
  asked_count: number;
  questions_asked: number;
  annotation_count: number;
  revision: number;
  labels: string[];
  loss_history: number[];
}

export interface Heatmap {
  image_id: string;
  image_w: number;
  image_h: number;
  layer_index: number;
  grid_h: number;
  grid_w: number;
  stride_px: number;
  offset_px: number;
  values: number[][];
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Error carrying the HTTP status so the controller can tell 409 from the rest. */
export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function fail(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.base + path);
    if (!res.ok) await fail(res);
    return (await res.json()) as T;
  }

  nextQuestion(): Promise<NextQuestion> {
    return this.getJson<NextQuestion>("/v1/next-question");
  }

  async postAnswer(payload: AnswerPayload): Promise<AnswerResult> {
    const res = await this.fetchFn(this.base + "/v1/answer", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!res.ok) await fail(res);
    return (await res.json()) as AnswerResult;
  }

  progress(): Promise<Progress> {
    return this.getJson<Progress>("/v1/progress");
  }

  heatmap(imageId: string): Promise<Heatmap> {
    return this.getJson<Heatmap>(`/v1/heatmap/${encodeURIComponent(imageId)}`);
  }

  imageUrl(path: string): string {
    return this.base + path;
  }
}
