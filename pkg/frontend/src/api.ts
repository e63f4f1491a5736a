import { SessionSnapshot, TurnResponse } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin typed client over the documented service endpoints. */
export class ApiClient {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, `${method} ${path}: ${response.statusText}`);
    }
    return response.json() as Promise<T>;
  }

  async health(): Promise<boolean> {
    try {
      const body = await this.request<{ status: string }>("GET", "/v1/health");
      return body.status === "ok";
    } catch {
      return false;
    }
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("POST", "/v1/sessions");
  }

  postMessage(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request("POST", `/v1/sessions/${sessionId}/message`, { text });
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return this.request("GET", `/v1/sessions/${sessionId}`);
  }
}
