/** Session state holder: one outstanding question at a time, answers vetted
 * by the legality guard before anything reaches the wire, and the view is
 * always exactly what the server last said (no client-side inference). */

import { ApiClient, ApiError } from "./api.js";
import type { AnswerKind, SessionView } from "./api.js";
import { isLegalAnswer } from "./guard.js";

export type Listener = (view: SessionView | null, error: string | null) => void;

export class GuardError extends Error {}

export class SessionController {
  private view: SessionView | null = null;
  private busy = false;
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  onUpdate(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(error: string | null = null): void {
    for (const listener of this.listeners) {
      listener(this.view, error);
    }
  }

  current(): SessionView | null {
    return this.view;
  }

  isBusy(): boolean {
    return this.busy;
  }

  /** Concepts newly added by this session, for tree highlighting. */
  insertedBranch(): string[] {
    return this.view?.outcome === "inserted" ? this.view.inserted : [];
  }

  cursorTopic(): string | null {
    return this.view?.question?.object ?? null;
  }

  async start(concept: string, method: number, entityType?: string): Promise<SessionView> {
    this.view = await this.api.createSession(concept, method, entityType);
    this.notify();
    return this.view;
  }

  /** Reconnect to a live or finished session; the server state is the view. */
  async resume(sessionId: string): Promise<SessionView> {
    this.view = await this.api.getSession(sessionId);
    this.notify();
    return this.view;
  }

  async answer(kind: AnswerKind, text?: string): Promise<SessionView> {
    if (!this.view || !this.view.question) {
      throw new GuardError("no pending question to answer");
    }
    if (this.busy) {
      throw new GuardError("an answer is already in flight");
    }
    if (!isLegalAnswer(this.view.question.kind, kind)) {
      throw new GuardError(
        `${kind} is not a legal answer to a ${this.view.question.kind} question`,
      );
    }
    if (kind === "free-text" && !(text && text.trim())) {
      throw new GuardError("free-text answers need text");
    }
    this.busy = true;
    try {
      this.view = await this.api.answerSession(this.view.session_id, kind, text);
      this.notify();
      return this.view;
    } catch (error) {
      // surface server errors verbatim; the question state is unchanged
      const message = error instanceof ApiError ? error.message : String(error);
      this.notify(message);
      throw error;
    } finally {
      this.busy = false;
    }
  }
}
