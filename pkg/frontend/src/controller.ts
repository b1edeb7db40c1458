/** Question lifecycle: fetch, collect one answer, submit, handle conflicts. */

import { ApiClient, ApiError, type AnswerResult, type Question } from "./api";
import { buildPayload, emptyDraft, validate, type Draft } from "./answer";

export interface SessionState {
  question: Question | null;
  exhausted: boolean;
  draft: Draft;
  knownLabels: string[];
  banner: string;
  lastResult: AnswerResult | null;
}

export type SubmitOutcome = "committed" | "rejected" | "stale" | "network";

export class SessionController {
  state: SessionState = {
    question: null,
    exhausted: false,
    draft: emptyDraft(),
    knownLabels: [],
    banner: "",
    lastResult: null,
  };

  constructor(private readonly api: ApiClient) {}

  /** Fetch the next question; a fresh question always gets a fresh draft. */
  async loadNext(): Promise<void> {
    const next = await this.api.nextQuestion();
    this.state.question = next.question;
    this.state.exhausted = next.exhausted;
    this.state.draft = emptyDraft();
    if (!next.exhausted) this.state.banner = "";
  }

  /** Re-fetch the proposal after a conflict; keep the drawn answer when the
   *  fresh question is still about the same image. */
  private async refetch(): Promise<void> {
    const kept = this.state.draft;
    const keptImage = this.state.question?.image_id ?? null;
    const next = await this.api.nextQuestion();
    this.state.question = next.question;
    this.state.exhausted = next.exhausted;
    if (next.question !== null && next.question.image_id === keptImage) {
      this.state.draft = { ...kept };
    } else {
      this.state.draft = emptyDraft();
    }
  }

  async submit(): Promise<SubmitOutcome> {
    const question = this.state.question;
    if (question === null) {
      this.state.banner = "no question to answer";
      return "rejected";
    }
    const verdict = validate(this.state.draft, this.state.knownLabels);
    if (!verdict.ok) {
      this.state.banner = verdict.message;
      return "rejected";
    }
    try {
      const result = await this.api.postAnswer(buildPayload(question, this.state.draft));
      this.state.lastResult = result;
      this.state.knownLabels = result.aog.templates.map((t) => t.label);
      this.state.banner = "";
      await this.loadNext();
      return "committed";
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.banner = "question went stale; the proposal was refreshed";
        await this.refetch();
        return "stale";
      }
      if (err instanceof ApiError) {
        this.state.banner = err.message;
        return "rejected";
      }
      this.state.banner = "network trouble; your answer was kept, retry";
      return "network";
    }
  }
}
