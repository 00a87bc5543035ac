// Top-down canvas rendering: scene footprint, region of interest, sensors,
// and the density-colored preview cloud.

import type { PlacementDraft } from "./model.js";
import type { PreviewCloud, SceneSummary } from "./types.js";

export interface Viewport {
  scale: number; // pixels per meter
  cx: number; // world origin x in canvas px
  cy: number;
}

export function fitViewport(bounds: { min: number[]; max: number[] },
                            width: number, height: number, margin = 30): Viewport {
  const spanX = Math.max(bounds.max[0] - bounds.min[0], 1);
  const spanY = Math.max(bounds.max[1] - bounds.min[1], 1);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  const midX = (bounds.min[0] + bounds.max[0]) / 2;
  const midY = (bounds.min[1] + bounds.max[1]) / 2;
  return { scale, cx: width / 2 - midX * scale, cy: height / 2 + midY * scale };
}

export function worldToCanvas(v: Viewport, x: number, y: number): [number, number] {
  return [v.cx + x * v.scale, v.cy - y * v.scale]; // +y (north) is up
}

export function canvasToWorld(v: Viewport, px: number, py: number): [number, number] {
  return [(px - v.cx) / v.scale, (v.cy - py) / v.scale];
}

const LABEL_COLORS: Record<string, string> = {
  road: "#3a3f45",
  building: "#7a6f5d",
  glass: "#5d8ca8",
  water: "#4a7fb5",
  vegetation: "#5d7a4f",
  vehicle: "#a85d5d",
  other: "#666666",
};

function rotatedRect(ctx: CanvasRenderingContext2D, v: Viewport, cx: number,
                     cy: number, sx: number, sy: number, yaw: number) {
  const [px, py] = worldToCanvas(v, cx, cy);
  ctx.save();
  ctx.translate(px, py);
  ctx.rotate(-yaw); // canvas y is flipped, so CCW world yaw is CW on screen
  ctx.beginPath();
  ctx.rect(-sx * v.scale / 2, -sy * v.scale / 2, sx * v.scale, sy * v.scale);
  ctx.restore();
}

export function drawScene(ctx: CanvasRenderingContext2D, v: Viewport,
                          scene: SceneSummary) {
  const labelOf = new Map(scene.materials.map((m) => [m.name, m.label]));
  for (const el of scene.elements) {
    const color = LABEL_COLORS[labelOf.get(el.material) ?? "other"] ?? "#666";
    ctx.fillStyle = color;
    if (el.type === "ground_plane" && el.center && el.size) {
      ctx.globalAlpha = 0.25;
      rotatedRect(ctx, v, el.center[0], el.center[1], el.size[0], el.size[1], 0);
      ctx.fill();
    } else if (el.type === "box" && el.center && el.size) {
      ctx.globalAlpha = 0.8;
      rotatedRect(ctx, v, el.center[0], el.center[1], el.size[0], el.size[1], el.yaw ?? 0);
      ctx.fill();
    } else if (el.type === "triangle" && el.vertices) {
      ctx.globalAlpha = 0.8;
      ctx.beginPath();
      const [x0, y0] = worldToCanvas(v, el.vertices[0][0], el.vertices[0][1]);
      ctx.moveTo(x0, y0);
      for (const vert of el.vertices.slice(1)) {
        const [x, y] = worldToCanvas(v, vert[0], vert[1]);
        ctx.lineTo(x, y);
      }
      ctx.closePath();
      ctx.fill();
    }
  }
  ctx.globalAlpha = 1;
}

export function drawGrid(ctx: CanvasRenderingContext2D, v: Viewport,
                         width: number, height: number, step = 20) {
  ctx.strokeStyle = "#2a2e33";
  ctx.lineWidth = 1;
  const [minX, maxY] = canvasToWorld(v, 0, 0);
  const [maxX, minY] = canvasToWorld(v, width, height);
  for (let x = Math.ceil(minX / step) * step; x <= maxX; x += step) {
    const [px] = worldToCanvas(v, x, 0);
    ctx.beginPath();
    ctx.moveTo(px, 0);
    ctx.lineTo(px, height);
    ctx.stroke();
  }
  for (let y = Math.ceil(minY / step) * step; y <= maxY; y += step) {
    const [, py] = worldToCanvas(v, 0, y);
    ctx.beginPath();
    ctx.moveTo(0, py);
    ctx.lineTo(width, py);
    ctx.stroke();
  }
}

export function drawLob(ctx: CanvasRenderingContext2D, v: Viewport,
                        lob: { center: [number, number]; half_extents: [number, number]; yaw: number }) {
  ctx.strokeStyle = "#e8c44a";
  ctx.lineWidth = 2;
  ctx.setLineDash([8, 4]);
  rotatedRect(ctx, v, lob.center[0], lob.center[1],
              lob.half_extents[0] * 2, lob.half_extents[1] * 2, lob.yaw);
  ctx.stroke();
  ctx.setLineDash([]);
}

/** Preview points colored by local 2-D density (grid-binned, blue -> yellow). */
export function drawPreview(ctx: CanvasRenderingContext2D, v: Viewport,
                            preview: PreviewCloud, bins = 48) {
  const pts = preview.points;
  if (pts.length === 0) return;
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const p of pts) {
    if (p[0] < minX) minX = p[0];
    if (p[0] > maxX) maxX = p[0];
    if (p[1] < minY) minY = p[1];
    if (p[1] > maxY) maxY = p[1];
  }
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const counts = new Float64Array(bins * bins);
  const binOf = (p: number[]) => {
    const bx = Math.min(bins - 1, Math.floor(((p[0] - minX) / spanX) * bins));
    const by = Math.min(bins - 1, Math.floor(((p[1] - minY) / spanY) * bins));
    return by * bins + bx;
  };
  for (const p of pts) counts[binOf(p)] += 1;
  let maxCount = 1;
  for (const c of counts) if (c > maxCount) maxCount = c;
  for (let i = 0; i < pts.length; i++) {
    const t = Math.sqrt(counts[binOf(pts[i])] / maxCount); // perceptual ramp
    const r = Math.round(40 + 215 * t);
    const g = Math.round(90 + 140 * t);
    const b = Math.round(200 - 150 * t);
    ctx.fillStyle = preview.ghost[i] ? "#ff5577" : `rgb(${r},${g},${b})`;
    const [px, py] = worldToCanvas(v, pts[i][0], pts[i][1]);
    ctx.fillRect(px - 1, py - 1, 2, 2);
  }
}

export function drawSensors(ctx: CanvasRenderingContext2D, v: Viewport,
                            draft: PlacementDraft) {
  draft.sensors.forEach((s, i) => {
    const [px, py] = worldToCanvas(v, s.x, s.y);
    const selected = i === draft.selected;
    ctx.beginPath();
    ctx.arc(px, py, selected ? 9 : 7, 0, 2 * Math.PI);
    ctx.fillStyle = selected ? "#6ee7a0" : "#3fae6e";
    ctx.fill();
    ctx.strokeStyle = "#0c0f12";
    ctx.lineWidth = 2;
    ctx.stroke();
    // yaw indicator
    const yaw = s.yawDeg * Math.PI / 180;
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.lineTo(px + 16 * Math.cos(yaw), py - 16 * Math.sin(yaw));
    ctx.strokeStyle = selected ? "#6ee7a0" : "#3fae6e";
    ctx.stroke();
    ctx.fillStyle = "#dfe6ec";
    ctx.font = "11px sans-serif";
    ctx.fillText(String(i + 1), px - 3, py + 4);
  });
}

/** Hit test for dragging: returns the sensor index under the cursor, or -1. */
export function sensorAt(v: Viewport, draft: PlacementDraft,
                         px: number, py: number, radius = 10): number {
  for (let i = draft.sensors.length - 1; i >= 0; i--) {
    const [sx, sy] = worldToCanvas(v, draft.sensors[i].x, draft.sensors[i].y);
    if ((sx - px) ** 2 + (sy - py) ** 2 <= radius * radius) return i;
  }
  return -1;
}
