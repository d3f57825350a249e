/**
 * Typed client for the session HTTP API. The UI talks only to these
 * endpoints; it never reaches a model provider directly.
 */

import type {
  Action,
  ActionResult,
  GraphDocument,
  SessionState,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function check<T>(resp: Response): Promise<T> {
  const body = await resp.json();
  if (!resp.ok) {
    const detail = body.detail ?? body;
    throw new ApiError(
      resp.status,
      detail.error ?? "Unknown",
      detail.message ?? resp.statusText,
    );
  }
  return body as T;
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return check<T>(resp);
  }

  private async get<T>(path: string): Promise<T> {
    return check<T>(await fetch(this.baseUrl + path));
  }

  async createSession(title: string): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", { title });
    return body.session_id;
  }

  async getGraph(sessionId: string): Promise<GraphDocument> {
    return this.get(`/sessions/${sessionId}/graph`);
  }

  async getState(sessionId: string): Promise<SessionState> {
    return this.get(`/sessions/${sessionId}/state`);
  }

  async act(sessionId: string, action: Action): Promise<ActionResult> {
    return this.post(`/sessions/${sessionId}/actions`, action);
  }

  async getTranscript(
    sessionId: string,
    nodeId: string,
  ): Promise<{ entries: { role: string; text: string; source: string }[] }> {
    return this.get(`/sessions/${sessionId}/transcript/${nodeId}`);
  }

  eventsUrl(sessionId: string, after = 0, follow = true): string {
    return `${this.baseUrl}/sessions/${sessionId}/events?after=${after}&follow=${follow}`;
  }
}
