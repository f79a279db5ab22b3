import {
  Recommendation,
  ResultAck,
  ResultSubmission,
  SessionConfig,
  SessionState,
  recommendationSchema,
  resultAckSchema,
  sessionStateSchema,
} from "./types";

/** Error carrying the HTTP status so callers can branch on 409 vs everything else. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
  }
}

async function readDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}

export class AdvisorClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await fetch(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw new ApiError(response.status, await readDetail(response));
    }
    return response;
  }

  private async post(path: string, body: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async createSession(config: SessionConfig): Promise<string> {
    const response = await this.post("/v1/sessions", {
      n: config.n,
      prior: { q: config.q },
      assumed_params: { s: config.s, sigma: config.sigma },
      delta: config.delta,
      max_tests: config.maxTests,
    });
    const body = (await response.json()) as { session_id: string };
    return body.session_id;
  }

  async getRecommendation(sessionId: string): Promise<Recommendation> {
    const response = await this.request(`/v1/sessions/${sessionId}/recommendation`);
    return recommendationSchema.parse(await response.json());
  }

  async postResult(sessionId: string, submission: ResultSubmission): Promise<ResultAck> {
    const response = await this.post(`/v1/sessions/${sessionId}/results`, submission);
    return resultAckSchema.parse(await response.json());
  }

  async getState(sessionId: string): Promise<SessionState> {
    const response = await this.request(`/v1/sessions/${sessionId}/state`);
    return sessionStateSchema.parse(await response.json());
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.request(`/v1/sessions/${sessionId}`, { method: "DELETE" });
  }
}
