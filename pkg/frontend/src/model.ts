// Pure placement-draft state and its mapping to evaluation requests.
// Everything here is side-effect free so it can be unit tested; every metric
// the UI shows is read from an EvaluateResponse, never recomputed locally.

import type {
  EvaluateRequest,
  LobSpec,
  MetricsReport,
  SensorSpec,
} from "./types.js";

export const DEG = Math.PI / 180;

export interface SensorDraft {
  preset: string;
  x: number; // meters
  y: number;
  z: number;
  rollDeg: number; // human-facing degrees; converted at the request boundary
  pitchDeg: number;
  yawDeg: number;
}

export interface PlacementDraft {
  sensors: SensorDraft[];
  selected: number; // index into sensors, -1 when empty
  lob: LobSpec;
  seed: number;
  disks: number;
  diskRatio: number;
  previewTarget: number;
}

export interface ComparisonEntry {
  id: number;
  label: string;
  sensors: SensorDraft[]; // immutable snapshot
  report: MetricsReport;
  score: number | null;
  timestamp: number;
}

export function defaultDraft(lob: LobSpec): PlacementDraft {
  return {
    sensors: [],
    selected: -1,
    lob,
    seed: 0,
    disks: 100,
    diskRatio: 0.005,
    previewTarget: 5000,
  };
}

export function addSensor(draft: PlacementDraft, preset: string,
                          x = 0, y = 0, z = 5): PlacementDraft {
  const sensors = [...draft.sensors,
                   { preset, x, y, z, rollDeg: 0, pitchDeg: 0, yawDeg: 0 }];
  return { ...draft, sensors, selected: sensors.length - 1 };
}

export function removeSensor(draft: PlacementDraft, index: number): PlacementDraft {
  const sensors = draft.sensors.filter((_, i) => i !== index);
  return { ...draft, sensors, selected: Math.min(draft.selected, sensors.length - 1) };
}

/** Drag by a world-space delta: translation updates by exactly (dx, dy). */
export function applyDrag(draft: PlacementDraft, index: number,
                          dx: number, dy: number): PlacementDraft {
  const sensors = draft.sensors.map((s, i) =>
    i === index ? { ...s, x: s.x + dx, y: s.y + dy } : s);
  return { ...draft, sensors };
}

export function updateSensor(draft: PlacementDraft, index: number,
                             patch: Partial<SensorDraft>): PlacementDraft {
  const sensors = draft.sensors.map((s, i) => (i === index ? { ...s, ...patch } : s));
  return { ...draft, sensors };
}

export function sensorToSpec(s: SensorDraft): SensorSpec {
  return {
    preset: s.preset,
    position: [s.x, s.y, s.z],
    rpy: [s.rollDeg * DEG, s.pitchDeg * DEG, s.yawDeg * DEG],
  };
}

export function specToSensor(spec: SensorSpec): SensorDraft {
  return {
    preset: spec.preset,
    x: spec.position[0],
    y: spec.position[1],
    z: spec.position[2],
    rollDeg: spec.rpy[0] / DEG,
    pitchDeg: spec.rpy[1] / DEG,
    yawDeg: spec.rpy[2] / DEG,
  };
}

/** A draft is always serializable to a valid request (given >= 1 sensor). */
export function draftToRequest(draft: PlacementDraft): EvaluateRequest {
  return {
    scene: null,
    sensors: draft.sensors.map(sensorToSpec),
    lob: draft.lob,
    metrics: { disks: draft.disks, disk_ratio: draft.diskRatio, nuc_labels: ["road"] },
    frames: 1,
    seed: draft.seed,
    preview_target: draft.previewTarget,
  };
}

/** Inverse of draftToRequest for the sensor payload (round-trip lossless). */
export function requestToDraft(req: EvaluateRequest): PlacementDraft {
  return {
    sensors: req.sensors.map(specToSensor),
    selected: req.sensors.length - 1,
    lob: req.lob,
    seed: req.seed,
    disks: req.metrics.disks,
    diskRatio: req.metrics.disk_ratio,
    previewTarget: req.preview_target,
  };
}

let nextEntryId = 1;

export function pinEntry(entries: ComparisonEntry[], draft: PlacementDraft,
                         report: MetricsReport, now: number): ComparisonEntry[] {
  const entry: ComparisonEntry = {
    id: nextEntryId++,
    label: `#${nextEntryId - 1} (${draft.sensors.length} sensor${draft.sensors.length === 1 ? "" : "s"})`,
    sensors: draft.sensors.map((s) => ({ ...s })),
    report,
    score: null,
    timestamp: now,
  };
  return [...entries, entry];
}

export type SortKey = "InfraD" | "InfraNUC" | "pinned";

export function sortEntries(entries: ComparisonEntry[], key: SortKey,
                            ascending: boolean): ComparisonEntry[] {
  const sorted = [...entries];
  if (key === "pinned") {
    sorted.sort((a, b) => a.id - b.id);
  } else {
    sorted.sort((a, b) => a.report[key] - b.report[key]);
  }
  if (!ascending) sorted.reverse();
  return sorted;
}

export function formatMetric(value: number): string {
  if (!Number.isFinite(value)) return "-";
  return value >= 100 ? value.toFixed(1) : value.toPrecision(4);
}
