import type { ViewState } from "./store";
import type { ComparisonRowDoc, SessionState, SuggestionDoc } from "./types";

export const CLUSTER_COLORS = [
  "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
  "#a65628", "#f781bf", "#999999",
];

export function clusterColor(cluster: number): string {
  return CLUSTER_COLORS[cluster % CLUSTER_COLORS.length];
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

interface Projector {
  x(lon: number): number;
  y(lat: number): number;
}

function projector(lats: number[], lons: number[], width: number, height: number): Projector {
  const pad = 0.06;
  const latMin = Math.min(...lats), latMax = Math.max(...lats);
  const lonMin = Math.min(...lons), lonMax = Math.max(...lons);
  const latSpan = latMax - latMin || 1;
  const lonSpan = lonMax - lonMin || 1;
  return {
    x: (lon) => (pad + (1 - 2 * pad) * (lon - lonMin) / lonSpan) * width,
    // SVG y grows downward; north stays up
    y: (lat) => (pad + (1 - 2 * pad) * (latMax - lat) / latSpan) * height,
  };
}

/**
 * Points colored by assigned cluster with opacity following the membership
 * strength toward that cluster; hubs (once placed) drawn as diamonds.
 */
export function renderMapSvg(view: ViewState, width = 720, height = 560): string {
  const { instance, session } = view;
  if (!instance || !session) return `<svg width="${width}" height="${height}"></svg>`;
  const lats = instance.points.map((p) => p.lat).concat(instance.depot.lat);
  const lons = instance.points.map((p) => p.lon).concat(instance.depot.lon);
  const proj = projector(lats, lons, width, height);

  const index = new Map(instance.points.map((p, i) => [p.id, i]));
  const parts: string[] = [
    `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  ];
  for (const p of instance.points) {
    const cluster = session.assignment[p.id];
    const row = session.membership[index.get(p.id)!];
    const opacity = Math.max(0.25, row[cluster]).toFixed(3);
    const selected = view.selectedPoint === p.id ? ` stroke="#000" stroke-width="2"` : "";
    parts.push(
      `<circle class="point" data-point="${esc(p.id)}" data-cluster="${cluster}"` +
      ` cx="${proj.x(p.lon).toFixed(1)}" cy="${proj.y(p.lat).toFixed(1)}" r="6"` +
      ` fill="${clusterColor(cluster)}" fill-opacity="${opacity}"${selected}/>`,
    );
  }
  const dx = proj.x(instance.depot.lon).toFixed(1);
  const dy = proj.y(instance.depot.lat).toFixed(1);
  parts.push(`<rect class="depot" x="${dx}" y="${dy}" width="12" height="12" fill="#000"/>`);
  if (view.design) {
    for (const h of view.design.hubs) {
      const x = proj.x(h.lon), y = proj.y(h.lat);
      parts.push(
        `<polygon class="hub" data-cluster="${h.cluster}" fill="${clusterColor(h.cluster)}"` +
        ` stroke="#000" points="${x},${y - 9} ${x + 9},${y} ${x},${y + 9} ${x - 9},${y}"/>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Cost readout plus per-cluster demand bars against their target bounds. */
export function renderMetricsPanel(session: SessionState): string {
  const m = session.metrics;
  const maxDemand = Math.max(...m.cluster_demand, 1e-9);
  const rows = m.cluster_demand.map((demand, c) => {
    const cap = session.capacity[c];
    const width = (100 * demand / maxDemand).toFixed(1);
    const bounds = cap.target
      ? ` data-lo="${cap.target[0]}" data-hi="${cap.target[1]}"` : "";
    const violation = cap.violation ? ` data-violation="${cap.violation}"` : "";
    return `<div class="demand-bar" data-cluster="${c}" data-demand="${demand}"${bounds}${violation}>` +
      `<span style="width:${width}%;background:${clusterColor(c)}"></span>` +
      `${demand.toFixed(1)}</div>`;
  });
  return [
    `<div class="metric" id="approx-cost">${m.approx_cost_km.toFixed(4)}</div>`,
    `<div class="metric" id="interhub">${m.interhub_km.toFixed(4)}</div>`,
    `<div class="metric" id="intracluster">${m.intracluster_km.toFixed(4)}</div>`,
    `<div class="metric" id="demand-cv">${m.demand_cv.toFixed(4)}</div>`,
    `<div id="demand-bars">${rows.join("")}</div>`,
  ].join("\n");
}

export function renderSuggestions(suggestions: SuggestionDoc[], cluster: number | null): string {
  if (cluster === null) return `<div id="suggestions" data-empty="true"></div>`;
  const items = suggestions.map((s) =>
    `<li class="suggestion" data-point="${esc(s.point)}" data-delta="${s.delta_cost}">` +
    `${esc(s.point)} m=${s.membership.toFixed(3)} ` +
    `${s.delta_cost >= 0 ? "+" : ""}${s.delta_cost.toFixed(2)} km` +
    `<button data-apply="${esc(s.point)}">apply</button></li>`);
  return `<div id="suggestions" data-cluster="${cluster}"><ul>${items.join("")}</ul></div>`;
}

export function renderHistoryPanel(session: SessionState): string {
  const undoAttr = session.can_undo ? "" : " disabled";
  const redoAttr = session.can_redo ? "" : " disabled";
  return [
    `<button id="undo"${undoAttr}>undo</button>`,
    `<button id="redo"${redoAttr}>redo</button>`,
    `<span id="cursor">${session.cursor}/${session.history_length}</span>`,
  ].join("");
}

export function renderCompareTable(rows: ComparisonRowDoc[]): string {
  const header = "<tr><th>scenario</th><th>trucks</th><th>trucks_ratio</th>" +
    "<th>total_cost</th><th>total_ratio</th><th>pickup_cost</th><th>pickup_ratio</th>" +
    "<th>delivery_cost</th><th>delivery_ratio</th></tr>";
  const body = rows.map((r) =>
    `<tr data-scenario="${esc(r.scenario)}"><td>${esc(r.scenario)}</td>` +
    `<td>${r.trucks}</td><td>${r.trucks_ratio.toFixed(2)}</td>` +
    `<td>${r.total_cost.toFixed(2)}</td><td>${r.total_ratio.toFixed(2)}</td>` +
    `<td>${r.pickup_cost.toFixed(2)}</td><td>${r.pickup_ratio.toFixed(2)}</td>` +
    `<td>${r.delivery_cost.toFixed(2)}</td><td>${r.delivery_ratio.toFixed(2)}</td></tr>`);
  return `<table id="compare">${header}${body.join("")}</table>`;
}

export function renderNotices(view: ViewState): string {
  const toast = view.toast ? `<div class="toast">${esc(view.toast)}</div>` : "";
  const banner = view.banner
    ? `<div class="banner">${esc(view.banner)}<button id="retry">retry</button></div>` : "";
  return toast + banner;
}
