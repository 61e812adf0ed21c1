// Schemas of the /api/v1 JSON surface. These mirror the server types
// one-to-one; the UI never computes metrics itself.

export interface GeoPointDoc {
  lat: number;
  lon: number;
}

export interface DemandPointDoc {
  id: string;
  lat: number;
  lon: number;
  pickup_demand: number;
  delivery_demand: number;
}

export interface InstanceDoc {
  id: string;
  points: DemandPointDoc[];
  parcels: { id: string; origin: string; dest: string; size: number }[];
  depot: GeoPointDoc;
}

export interface SweepRowDoc {
  c: number;
  approx_cost: number;
  fpc: number;
  clustering_id: string;
}

export interface ClusterResponse {
  clustering_id: string;
  best_c: number;
  rows: SweepRowDoc[];
}

export interface MetricsDoc {
  approx_cost_km: number;
  interhub_km: number;
  interhub_km_unordered: number;
  intracluster_km: number;
  cluster_demand: number[];
  demand_cv: number;
  cluster_sizes: number[];
}

export interface CapacityRow {
  cluster: number;
  demand: number;
  target: [number, number] | null;
  violation: "under" | "over" | null;
}

export interface SessionState {
  session_id: string;
  instance_id: string;
  k: number;
  assignment: Record<string, number>;
  membership: number[][];
  metrics: MetricsDoc;
  capacity: CapacityRow[];
  cursor: number;
  history_length: number;
  can_undo: boolean;
  can_redo: boolean;
}

export interface SuggestionDoc {
  point: string;
  membership: number;
  demand: number;
  delta_cost: number;
}

export interface HubDoc {
  cluster: number;
  lat: number;
  lon: number;
}

export interface FinalizeResponse {
  design_id: string;
  provenance: string;
  hubs: HubDoc[];
}

export interface JobDoc {
  job_id: string;
  status: "queued" | "running" | "done" | "error";
  design_id: string;
  scenario: string;
  result?: ScenarioResultDoc;
  error?: ApiErrorBody;
}

export interface ScenarioResultDoc {
  scenario: string;
  trucks_used: number;
  total_cost: number;
  pickup_cost: number;
  delivery_cost: number;
  [extra: string]: unknown;
}

export interface ComparisonRowDoc {
  scenario: string;
  trucks: number;
  trucks_ratio: number;
  total_cost: number;
  total_ratio: number;
  pickup_cost: number;
  pickup_ratio: number;
  delivery_cost: number;
  delivery_ratio: number;
}

export interface ReportDoc {
  columns: string[];
  rows: ComparisonRowDoc[];
  markdown: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: Record<string, unknown>;
}
