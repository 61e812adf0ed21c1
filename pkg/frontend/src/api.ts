import type {
  ApiErrorBody,
  ClusterResponse,
  FinalizeResponse,
  InstanceDoc,
  JobDoc,
  ReportDoc,
  SessionState,
  SuggestionDoc,
} from "./types";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: Record<string, unknown>;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.details = body.details ?? {};
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper over the /api/v1 endpoints. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = (...a) => fetch(...a)) {
    this.base = baseUrl.replace(/\/$/, "") + "/api/v1";
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await resp.json()) as ApiErrorBody;
      } catch {
        parsed = { code: "http", message: `HTTP ${resp.status}` };
      }
      throw new ApiError(resp.status, parsed);
    }
    return (await resp.json()) as T;
  }

  getInstance(id: string): Promise<InstanceDoc> {
    return this.request("GET", `/instances/${id}`);
  }

  cluster(instanceId: string, cValues: number[]): Promise<ClusterResponse> {
    return this.request("POST", `/instances/${instanceId}/cluster`, { c_values: cValues });
  }

  createSession(clusteringId: string): Promise<SessionState> {
    return this.request("POST", "/sessions", { clustering_id: clusteringId });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}`);
  }

  move(sessionId: string, point: string, to: number): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/moves`, { point, to, actor: "webui" });
  }

  undo(sessionId: string): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/undo`);
  }

  redo(sessionId: string): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/redo`);
  }

  suggestions(sessionId: string, cluster: number, limit = 10): Promise<SuggestionDoc[]> {
    return this.request<{ suggestions: SuggestionDoc[] }>(
      "GET", `/sessions/${sessionId}/suggestions?cluster=${cluster}&limit=${limit}`,
    ).then((r) => r.suggestions);
  }

  finalize(sessionId: string): Promise<FinalizeResponse> {
    return this.request("POST", `/sessions/${sessionId}/finalize`);
  }

  solve(designId: string, scenario: string,
        opts?: { budget_seconds?: number; budget_iters?: number; seed?: number; jobs?: number },
  ): Promise<{ job_id: string }> {
    return this.request("POST", `/designs/${designId}/scenarios/${scenario}/solve`, opts ?? {});
  }

  job(jobId: string): Promise<JobDoc> {
    return this.request("GET", `/jobs/${jobId}`);
  }

  /** Poll a solve job until it settles; rejects if the job errors. */
  async waitForJob(jobId: string, intervalMs = 200, timeoutMs = 120_000): Promise<JobDoc> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const doc = await this.job(jobId);
      if (doc.status === "done") return doc;
      if (doc.status === "error") {
        throw new ApiError(500, doc.error ?? { code: "internal", message: "job failed" });
      }
      if (Date.now() > deadline) {
        throw new ApiError(504, { code: "timeout", message: `job ${jobId} did not finish` });
      }
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }

  report(designId: string): Promise<ReportDoc> {
    return this.request("GET", `/designs/${designId}/report`);
  }
}
