// ============================================
// API CLIENT
// ============================================

import type {
  AdvanceResponse,
  DecisionsResponse,
  DocumentSummary,
  DocumentView,
  ErrorEnvelope,
  ProposeResponse,
  SessionView,
  Verdict,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** A non-2xx answer, carrying the server's uniform error envelope. */
export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: Record<string, unknown>;

  constructor(status: number, envelope: ErrorEnvelope) {
    super(envelope.message);
    this.status = status;
    this.code = envelope.code;
    this.details = envelope.details ?? {};
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // default binding: window.fetch detaches `this` when passed bare
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const payload = await res.json();
    if (!res.ok) {
      throw new ApiRequestError(res.status, payload as ErrorEnvelope);
    }
    return payload as T;
  }

  listDocuments(): Promise<{ documents: DocumentSummary[] }> {
    return this.request("GET", "/documents");
  }

  getDocument(docId: string): Promise<DocumentView> {
    return this.request("GET", `/documents/${encodeURIComponent(docId)}`);
  }

  createSession(
    docId: string,
    tMax?: number,
  ): Promise<{ session_id: string; state: string }> {
    const body: Record<string, unknown> = {
      doc_id: docId,
      mode: "system_human",
    };
    if (tMax !== undefined) body.t_max = tMax;
    return this.request("POST", "/sessions", body);
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  propose(sessionId: string): Promise<ProposeResponse> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/propose`,
    );
  }

  submitDecisions(
    sessionId: string,
    reviewerId: string,
    decisions: { edit_id: string; verdict: Verdict }[],
  ): Promise<DecisionsResponse> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/decisions`,
      { reviewer_id: reviewerId, decisions },
    );
  }

  advance(sessionId: string): Promise<AdvanceResponse> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/advance`,
    );
  }
}
