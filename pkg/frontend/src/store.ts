import { ApiClient, ApiError } from "./api";
import type {
  FinalizeResponse,
  InstanceDoc,
  ReportDoc,
  SessionState,
  SuggestionDoc,
} from "./types";

export interface ViewState {
  instance: InstanceDoc | null;
  session: SessionState | null;
  selectedCluster: number | null;
  selectedPoint: string | null;
  suggestions: SuggestionDoc[];
  design: FinalizeResponse | null;
  report: ReportDoc | null;
  /** transient server rejection (409 etc.), cleared on the next success */
  toast: string | null;
  /** network failure banner; retried actions clear it */
  banner: string | null;
  pending: boolean;
}

type Listener = (state: ViewState) => void;

/**
 * Single source of truth for the console. Moves render optimistically
 * (assignment only); the authoritative state, including every metric,
 * is always the last server response, and a rejected move rolls the
 * optimistic assignment back.
 */
export class SessionStore {
  private readonly api: ApiClient;
  private state: ViewState = {
    instance: null,
    session: null,
    selectedCluster: null,
    selectedPoint: null,
    suggestions: [],
    design: null,
    report: null,
    toast: null,
    banner: null,
    pending: false,
  };
  private listeners: Listener[] = [];

  constructor(api: ApiClient) {
    this.api = api;
  }

  getState(): ViewState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private set(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  async open(instanceId: string, cValues: number[] = [2, 3, 4, 5]): Promise<void> {
    await this.guard(async () => {
      const instance = await this.api.getInstance(instanceId);
      const sweep = await this.api.cluster(instanceId, cValues);
      const session = await this.api.createSession(sweep.clustering_id);
      this.set({ instance, session, design: null, report: null });
    });
  }

  selectCluster(cluster: number | null): void {
    this.set({ selectedCluster: cluster, suggestions: [] });
  }

  selectPoint(point: string | null): void {
    this.set({ selectedPoint: point });
  }

  async applyMove(point: string, to: number): Promise<boolean> {
    const session = this.state.session;
    if (!session) return false;
    // optimistic: recolor the point immediately, metrics stay server-owned
    const optimistic: SessionState = {
      ...session,
      assignment: { ...session.assignment, [point]: to },
    };
    this.set({ session: optimistic, pending: true });
    try {
      const fresh = await this.api.move(session.session_id, point, to);
      this.set({ session: fresh, toast: null, banner: null, pending: false });
      return true;
    } catch (err) {
      this.set({ session, pending: false, ...this.describe(err) });
      return false;
    }
  }

  async undo(): Promise<boolean> {
    return this.mutate((id) => this.api.undo(id));
  }

  async redo(): Promise<boolean> {
    return this.mutate((id) => this.api.redo(id));
  }

  async loadSuggestions(cluster: number, limit = 10): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    await this.guard(async () => {
      const suggestions = await this.api.suggestions(session.session_id, cluster, limit);
      this.set({ selectedCluster: cluster, suggestions });
    });
  }

  /** One-click apply of a ranked suggestion into the selected cluster. */
  async applySuggestion(s: SuggestionDoc): Promise<boolean> {
    const cluster = this.state.selectedCluster;
    if (cluster === null) return false;
    return this.applyMove(s.point, cluster);
  }

  async finalize(): Promise<FinalizeResponse | null> {
    const session = this.state.session;
    if (!session) return null;
    let out: FinalizeResponse | null = null;
    await this.guard(async () => {
      out = await this.api.finalize(session.session_id);
      this.set({ design: out });
    });
    return out;
  }

  async compare(scenarios: string[],
                opts?: { budget_seconds?: number; budget_iters?: number; seed?: number; jobs?: number },
  ): Promise<ReportDoc | null> {
    const design = this.state.design;
    if (!design) return null;
    let out: ReportDoc | null = null;
    await this.guard(async () => {
      const jobs = await Promise.all(
        scenarios.map((sid) => this.api.solve(design.design_id, sid, opts)));
      await Promise.all(jobs.map((j) => this.api.waitForJob(j.job_id)));
      out = await this.api.report(design.design_id);
      this.set({ report: out });
    });
    return out;
  }

  private async mutate(fn: (sessionId: string) => Promise<SessionState>): Promise<boolean> {
    const session = this.state.session;
    if (!session) return false;
    this.set({ pending: true });
    try {
      const fresh = await fn(session.session_id);
      this.set({ session: fresh, toast: null, banner: null, pending: false });
      return true;
    } catch (err) {
      this.set({ pending: false, ...this.describe(err) });
      return false;
    }
  }

  private async guard(fn: () => Promise<void>): Promise<void> {
    this.set({ pending: true });
    try {
      await fn();
      this.set({ toast: null, banner: null, pending: false });
    } catch (err) {
      this.set({ pending: false, ...this.describe(err) });
    }
  }

  private describe(err: unknown): Partial<ViewState> {
    if (err instanceof ApiError) {
      return { toast: err.message };
    }
    return { banner: err instanceof Error ? err.message : "network failure" };
  }
}
