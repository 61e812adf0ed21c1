import { ApiClient } from "./api";
import {
  renderCompareTable,
  renderHistoryPanel,
  renderMapSvg,
  renderMetricsPanel,
  renderNotices,
  renderSuggestions,
} from "./render";
import { SessionStore } from "./store";

const params = new URLSearchParams(window.location.search);
const instanceId = params.get("instance") ?? "demo";
const apiBase = params.get("api") ?? "";

const store = new SessionStore(new ApiClient(apiBase));

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function draw(): void {
  const view = store.getState();
  byId("map").innerHTML = renderMapSvg(view);
  byId("notices").innerHTML = renderNotices(view);
  if (view.session) {
    byId("metrics").innerHTML = renderMetricsPanel(view.session);
    byId("history").innerHTML = renderHistoryPanel(view.session);
  }
  byId("suggestion-panel").innerHTML =
    renderSuggestions(view.suggestions, view.selectedCluster);
  byId("compare-panel").innerHTML = view.report
    ? renderCompareTable(view.report.rows) : "";
}

store.subscribe(draw);

// click a point to select it, click again with a cluster chosen to move it
byId("map").addEventListener("click", (ev) => {
  const el = ev.target as Element;
  const point = el.getAttribute("data-point");
  const view = store.getState();
  if (point) {
    if (view.selectedCluster !== null && view.selectedPoint === point) {
      void store.applyMove(point, view.selectedCluster);
    } else {
      store.selectPoint(point);
    }
  }
});

byId("history").addEventListener("click", (ev) => {
  const id = (ev.target as Element).id;
  if (id === "undo") void store.undo();
  if (id === "redo") void store.redo();
});

byId("suggestion-panel").addEventListener("click", (ev) => {
  const point = (ev.target as Element).getAttribute("data-apply");
  const view = store.getState();
  const s = view.suggestions.find((x) => x.point === point);
  if (s) void store.applySuggestion(s);
});

byId("cluster-select").addEventListener("change", (ev) => {
  const value = (ev.target as HTMLSelectElement).value;
  if (value === "") {
    store.selectCluster(null);
  } else {
    void store.loadSuggestions(Number(value));
  }
});

byId("finalize").addEventListener("click", () => {
  void store.finalize().then((design) => {
    if (design) void store.compare(["S0", "S1", "S2", "S3"]);
  });
});

byId("notices").addEventListener("click", (ev) => {
  if ((ev.target as Element).id === "retry") void store.open(instanceId);
});

void store.open(instanceId).then(() => {
  const select = byId("cluster-select") as HTMLSelectElement;
  const k = store.getState().session?.k ?? 0;
  select.innerHTML = `<option value="">none</option>` +
    Array.from({ length: k }, (_, c) => `<option value="${c}">cluster ${c}</option>`).join("");
});
