import type {
  ApplyResult,
  FindingsPayload,
  HistoryEntry,
  ModelPayload,
  SessionCreated,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`service error ${status}: ${JSON.stringify(body)}`);
  }
}

// Thin typed client over the analysis service; fetch is injected so tests
// and the browser share the same code path.
export class AnalysisApi {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.url(path));
    const body = await response.json();
    if (!response.ok) {
      throw new ServiceError(response.status, body);
    }
    return body as T;
  }

  async createSession(model: string, kb = "", root?: string): Promise<SessionCreated> {
    const response = await this.fetchImpl(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(root ? { model, kb, root } : { model, kb }),
    });
    const body = await response.json();
    if (response.status !== 201) {
      throw new ServiceError(response.status, body);
    }
    return body as SessionCreated;
  }

  findings(session: string): Promise<FindingsPayload> {
    return this.getJson(`/sessions/${session}/findings`);
  }

  model(session: string, revision?: string): Promise<ModelPayload> {
    const query = revision ? `?rev=${revision}` : "";
    return this.getJson(`/sessions/${session}/model${query}`);
  }

  history(session: string): Promise<HistoryEntry[]> {
    return this.getJson<{ history: HistoryEntry[] }>(`/sessions/${session}/history`).then(
      (payload) => payload.history,
    );
  }

  async apply(session: string, finding: string, digest: string): Promise<ApplyResult> {
    const response = await this.fetchImpl(this.url(`/sessions/${session}/apply`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ finding, digest }),
    });
    const body = await response.json();
    if (response.status === 200) {
      return { status: 200, revision: body.revision, report: body.report };
    }
    if (response.status === 409 || response.status === 404) {
      return { status: response.status, error: body.error ?? "unknown" };
    }
    throw new ServiceError(response.status, body);
  }
}
