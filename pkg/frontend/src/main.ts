// Placement explorer wiring: drag sensors on the top-down view, tune angles
// in degrees, evaluate through the service, and pin results side by side.

import { ApiClient, ApiError, resolveApiBase } from "./api.js";
import {
  addSensor,
  applyDrag,
  ComparisonEntry,
  defaultDraft,
  draftToRequest,
  formatMetric,
  pinEntry,
  PlacementDraft,
  removeSensor,
  sortEntries,
  SortKey,
  updateSensor,
} from "./model.js";
import {
  canvasToWorld,
  drawGrid,
  drawLob,
  drawPreview,
  drawScene,
  drawSensors,
  fitViewport,
  sensorAt,
  Viewport,
} from "./render.js";
import type { EvaluateResponse, PresetInfo, SceneSummary } from "./types.js";

const api = new ApiClient(resolveApiBase(window.location.href));

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const controls = document.getElementById("controls")!;
const presetSelect = document.getElementById("preset") as HTMLSelectElement;
const sensorPanel = document.getElementById("sensor-panel")!;
const statusLine = document.getElementById("status")!;
const pinnedTable = document.getElementById("pinned") as HTMLTableElement;

let scene: SceneSummary | null = null;
let presets: PresetInfo[] = [];
let viewport: Viewport = { scale: 3, cx: canvas.width / 2, cy: canvas.height / 2 };
let draft: PlacementDraft = defaultDraft({
  center: [0, 0],
  half_extents: [20, 20],
  yaw: 0,
  z_band: [-0.5, 1.0],
});
let lastResponse: EvaluateResponse | null = null;
let pinned: ComparisonEntry[] = [];
let sortKey: SortKey = "pinned";
let sortAscending = true;
let evaluating = false;

function setDraft(next: PlacementDraft, invalidatePreview = true) {
  draft = next;
  if (invalidatePreview) lastResponse = null;
  renderSensorPanel();
  redraw();
}

function redraw() {
  ctx.fillStyle = "#16191d";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  drawGrid(ctx, viewport, canvas.width, canvas.height);
  if (scene) drawScene(ctx, viewport, scene);
  if (lastResponse) drawPreview(ctx, viewport, lastResponse.preview);
  drawLob(ctx, viewport, draft.lob);
  drawSensors(ctx, viewport, draft);
}

function metricsSummary(resp: EvaluateResponse): string {
  const r = resp.report;
  return `InfraD ${formatMetric(r.InfraD)} pts/m² · InfraNUC ${formatMetric(r.InfraNUC)} · ` +
    `${r.n_lob} pts in LOB · preview ${resp.preview.count}/${resp.preview.total_points} · ` +
    `${resp.timing_ms.toFixed(0)} ms`;
}

function renderSensorPanel() {
  sensorPanel.innerHTML = "";
  draft.sensors.forEach((s, i) => {
    const row = document.createElement("div");
    row.className = "sensor-row" + (i === draft.selected ? " selected" : "");
    const title = document.createElement("span");
    title.textContent = `${i + 1}: ${s.preset} (${s.x.toFixed(1)}, ${s.y.toFixed(1)}, ${s.z.toFixed(1)})`;
    title.addEventListener("click", () => setDraft({ ...draft, selected: i }, false));
    row.appendChild(title);

    for (const [key, label] of [["rollDeg", "roll"], ["pitchDeg", "pitch"], ["yawDeg", "yaw"]] as const) {
      const wrap = document.createElement("label");
      wrap.textContent = ` ${label}° `;
      const input = document.createElement("input");
      input.type = "number";
      input.step = "5";
      input.value = String(s[key]);
      input.addEventListener("change", () => {
        setDraft(updateSensor(draft, i, { [key]: Number(input.value) }));
      });
      wrap.appendChild(input);
      row.appendChild(wrap);
    }
    const zWrap = document.createElement("label");
    zWrap.textContent = " z ";
    const zInput = document.createElement("input");
    zInput.type = "number";
    zInput.step = "0.5";
    zInput.value = String(s.z);
    zInput.addEventListener("change", () =>
      setDraft(updateSensor(draft, i, { z: Number(zInput.value) })));
    zWrap.appendChild(zInput);
    row.appendChild(zWrap);

    const del = document.createElement("button");
    del.textContent = "✕";
    del.title = "remove sensor";
    del.addEventListener("click", () => setDraft(removeSensor(draft, i)));
    row.appendChild(del);
    sensorPanel.appendChild(row);
  });
}

function renderPinned() {
  const tbody = pinnedTable.querySelector("tbody")!;
  tbody.innerHTML = "";
  for (const entry of sortEntries(pinned, sortKey, sortAscending)) {
    const tr = document.createElement("tr");
    const cells = [
      entry.label,
      formatMetric(entry.report.InfraD),
      formatMetric(entry.report.InfraNUC),
      String(entry.report.n_lob),
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    tbody.appendChild(tr);
  }
}

function bindSortHeaders() {
  pinnedTable.querySelectorAll("th[data-key]").forEach((th) => {
    th.addEventListener("click", () => {
      const key = th.getAttribute("data-key") as SortKey;
      if (sortKey === key) {
        sortAscending = !sortAscending;
      } else {
        sortKey = key;
        sortAscending = true;
      }
      renderPinned();
    });
  });
}

async function evaluate(pin: boolean) {
  if (draft.sensors.length === 0) {
    statusLine.textContent = "add a sensor first";
    return;
  }
  if (evaluating) return; // one active evaluation per draft
  evaluating = true;
  statusLine.textContent = "evaluating…";
  try {
    const resp = await api.evaluate(draftToRequest(draft));
    lastResponse = resp;
    statusLine.textContent = metricsSummary(resp);
    if (pin) {
      pinned = pinEntry(pinned, draft, resp.report, Date.now());
      renderPinned();
    }
    redraw();
  } catch (err) {
    if (err instanceof ApiError && err.status === 422) {
      statusLine.textContent = "empty region of interest — move sensors closer to the LOB";
    } else {
      statusLine.textContent = `evaluation failed: ${err instanceof Error ? err.message : err}`;
    }
  } finally {
    evaluating = false;
  }
}

function bindCanvas() {
  let dragging = -1;
  let lastWorld: [number, number] = [0, 0];
  canvas.addEventListener("mousedown", (e) => {
    const rect = canvas.getBoundingClientRect();
    const px = e.clientX - rect.left;
    const py = e.clientY - rect.top;
    dragging = sensorAt(viewport, draft, px, py);
    if (dragging >= 0) {
      setDraft({ ...draft, selected: dragging }, false);
      lastWorld = canvasToWorld(viewport, px, py);
    }
  });
  canvas.addEventListener("mousemove", (e) => {
    if (dragging < 0) return;
    const rect = canvas.getBoundingClientRect();
    const world = canvasToWorld(viewport, e.clientX - rect.left, e.clientY - rect.top);
    setDraft(applyDrag(draft, dragging, world[0] - lastWorld[0], world[1] - lastWorld[1]));
    lastWorld = world;
  });
  const stop = () => { dragging = -1; };
  canvas.addEventListener("mouseup", stop);
  canvas.addEventListener("mouseleave", stop);
  canvas.addEventListener("dblclick", (e) => {
    const rect = canvas.getBoundingClientRect();
    const [x, y] = canvasToWorld(viewport, e.clientX - rect.left, e.clientY - rect.top);
    setDraft(addSensor(draft, presetSelect.value, Math.round(x * 2) / 2,
                       Math.round(y * 2) / 2, 5));
  });
}

function bindControls() {
  document.getElementById("add-sensor")!.addEventListener("click", () => {
    setDraft(addSensor(draft, presetSelect.value,
                       draft.lob.center[0] - 24, draft.lob.center[1] - 24, 5));
  });
  document.getElementById("evaluate")!.addEventListener("click", () => evaluate(false));
  document.getElementById("evaluate-pin")!.addEventListener("click", () => evaluate(true));
  const seedInput = document.getElementById("seed") as HTMLInputElement;
  seedInput.addEventListener("change", () =>
    setDraft({ ...draft, seed: Number(seedInput.value) || 0 }));
}

async function init() {
  bindCanvas();
  bindControls();
  bindSortHeaders();
  try {
    const health = await api.health();
    scene = await api.scene();
    presets = await api.presets();
    presetSelect.innerHTML = "";
    for (const p of presets) {
      const opt = document.createElement("option");
      opt.value = p.id;
      opt.textContent = `${p.id} (${p.family})`;
      presetSelect.appendChild(opt);
    }
    presetSelect.value = presets.find((p) => p.id === "velodyne_vlp16")?.id ?? presets[0].id;
    viewport = fitViewport(scene.bounds, canvas.width, canvas.height);
    banner.classList.add("hidden");
    (controls as HTMLFieldSetElement).removeAttribute("disabled");
    statusLine.textContent =
      `${scene.name}: ${scene.triangle_count} triangles · backend ${health.backend} · ` +
      "double-click the map to place a sensor";
    redraw();
  } catch {
    banner.textContent = "evaluation service unreachable — start it with: " +
      "infralidar serve --scene scenarios/crossroad.json";
    banner.classList.remove("hidden");
    (controls as HTMLFieldSetElement).setAttribute("disabled", "");
  }
}

init();
