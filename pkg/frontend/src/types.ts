// Wire types for the evaluation service API.

export interface SensorSpec {
  preset: string;
  position: [number, number, number]; // meters, world frame
  rpy: [number, number, number]; // radians: roll, pitch, yaw (ZYX intrinsic)
}

export interface LobSpec {
  center: [number, number];
  half_extents: [number, number];
  yaw: number; // radians
  z_band: [number, number];
}

export interface MetricParams {
  disks: number;
  disk_ratio: number;
  nuc_labels: string[] | null;
}

export interface EvaluateRequest {
  scene: null; // the explorer always evaluates against the service's preloaded scene
  sensors: SensorSpec[];
  lob: LobSpec;
  metrics: MetricParams;
  frames: number;
  seed: number;
  preview_target: number;
}

export interface MetricsReport {
  InfraD: number;
  InfraNUC: number;
  n_lob: number;
  n_nuc: number;
  area_m2: number;
  nuc_avg: number;
  disk_counts: number[];
  disk_centers: [number, number][];
  params: {
    disks: number;
    disk_ratio: number;
    seed: number;
    nuc_label_filter: string[] | null;
    density_label_filter: string[] | null;
  };
  extras: Record<string, unknown>;
}

export interface PreviewCloud {
  count: number;
  total_points: number;
  points: [number, number, number][];
  labels: number[];
  ghost: number[];
  intensity: number[];
}

export interface EvaluateResponse {
  seed: number;
  report: MetricsReport;
  preview: PreviewCloud;
  poses: { preset: string; position: number[]; rpy: number[] }[];
  timing_ms: number;
}

export interface SceneElement {
  type: "ground_plane" | "box" | "triangle";
  material: string;
  center?: number[];
  size?: number[];
  yaw?: number;
  vertices?: number[][];
}

export interface SceneSummary {
  name: string;
  triangle_count: number;
  bounds: { min: number[]; max: number[] };
  materials: { name: string; label: string }[];
  elements: SceneElement[];
}

export interface PresetInfo {
  id: string;
  name: string;
  family: string;
}
