import type {
  DivergenceReport,
  MutationEnvelope,
  MutationResponse,
  ReferenceTables,
  ReportCardDoc,
  SessionDocument,
} from "./types";

/** Server-side rejection; `detail` is the server's error text, verbatim. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** Stale-revision rejection carrying the revision to replay against. */
export class ConflictError extends ApiError {
  constructor(detail: string, readonly currentRevision: number) {
    super(409, detail);
    this.name = "ConflictError";
  }
}

interface ErrorBody {
  detail?: string;
  current_revision?: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (response.ok) {
      return (await response.json()) as T;
    }
    let body: ErrorBody = {};
    try {
      body = (await response.json()) as ErrorBody;
    } catch {
      // non-JSON error body; fall through to the status line
    }
    const detail = body.detail ?? `HTTP ${response.status}`;
    if (response.status === 409 && typeof body.current_revision === "number") {
      throw new ConflictError(detail, body.current_revision);
    }
    throw new ApiError(response.status, detail);
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getReferenceTables(): Promise<ReferenceTables> {
    return this.request("/reference/tables");
  }

  getTaxonomy(): Promise<unknown> {
    return this.request("/reference/taxonomy");
  }

  getRubrics(): Promise<unknown> {
    return this.request("/reference/rubrics");
  }

  getOperators(): Promise<unknown> {
    return this.request("/reference/operators");
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return this.request("/sessions");
  }

  createSession(body: Record<string, unknown>): Promise<SessionDocument> {
    return this.post("/sessions", body);
  }

  getSession(id: string): Promise<SessionDocument> {
    return this.request(`/sessions/${id}`);
  }

  getAspects(id: string): Promise<unknown> {
    return this.request(`/sessions/${id}/aspects`);
  }

  mutate(id: string, envelope: MutationEnvelope): Promise<MutationResponse> {
    return this.post(`/sessions/${id}/mutations`, envelope);
  }

  getDivergences(id: string): Promise<DivergenceReport> {
    return this.request(`/sessions/${id}/divergences`);
  }

  finalize(id: string, expectedRevision: number): Promise<MutationResponse> {
    return this.post(`/sessions/${id}/finalize`, {
      expected_revision: expectedRevision,
    });
  }

  getReportCard(id: string, scheme = "default"): Promise<ReportCardDoc> {
    return this.request(`/sessions/${id}/report-card?scheme=${scheme}`);
  }

  getTalliedMatrix(id: string): Promise<unknown> {
    return this.request(`/sessions/${id}/tallied-matrix`);
  }

  postOutputLog(id: string, completedAt: string): Promise<unknown> {
    return this.post(`/sessions/${id}/output-log`, { completed_at: completedAt });
  }
}
