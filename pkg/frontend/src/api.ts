/** Typed client for the insertion-session HTTP API. */

export type QuestionKind =
  | "yes-no"
  | "ask-definition"
  | "ask-sentence"
  | "propose-start"
  | "propose-leaf-attach"
  | "propose-sibling-attach";

export type AnswerKind = "yes" | "no" | "free-text" | "stop";

export type Outcome = "pending" | "inserted" | "declined" | "aborted";

export interface Question {
  kind: QuestionKind;
  text: string;
  subject: string;
  object: string | null;
}

export interface TranscriptRow {
  step: number;
  question: { kind: QuestionKind; text: string; object: string | null };
  answer: { kind: AnswerKind; text: string | null };
}

export interface SessionView {
  session_id: string;
  concept: string;
  method: number;
  outcome: Outcome;
  question: Question | null;
  step_count: number;
  definition_stack: string[];
  inserted: string[];
  transcript: TranscriptRow[];
  robot_utterance: string;
}

export interface TreeNode {
  topic: string;
  display: string;
  parent: string | null;
  children: string[];
  sentences: Record<string, string[]>;
}

export interface TreeDump {
  root: string;
  source_revision: number;
  nodes: TreeNode[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? response.statusText;
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return (await response.json()) as T;
  }

  createSession(
    concept: string,
    method: number,
    entityType?: string,
  ): Promise<SessionView> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ concept, method, entity_type: entityType ?? null }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  answerSession(
    sessionId: string,
    kind: AnswerKind,
    text?: string,
  ): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind, text: text ?? null }),
    });
  }

  async getTranscriptText(sessionId: string): Promise<string> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/transcript`,
    );
    if (!response.ok) {
      throw new ApiError(response.status, await parseDetail(response));
    }
    return response.text();
  }

  getTree(): Promise<TreeDump> {
    return this.request("/tree");
  }
}
