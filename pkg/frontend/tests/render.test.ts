import { describe, expect, it } from "vitest";

import { addSensor, defaultDraft } from "../src/model.js";
import { canvasToWorld, fitViewport, sensorAt, worldToCanvas } from "../src/render.js";
import { resolveApiBase } from "../src/api.js";

const LOB = { center: [0, 0] as [number, number],
              half_extents: [20, 20] as [number, number],
              yaw: 0, z_band: [-0.5, 1.0] as [number, number] };

describe("viewport", () => {
  const v = fitViewport({ min: [-80, -80, 0], max: [80, 80, 20] }, 800, 600);

  it("round-trips world <-> canvas", () => {
    const [px, py] = worldToCanvas(v, 12.5, -7.25);
    const [x, y] = canvasToWorld(v, px, py);
    expect(x).toBeCloseTo(12.5, 9);
    expect(y).toBeCloseTo(-7.25, 9);
  });

  it("keeps the scene inside the canvas with margin", () => {
    for (const corner of [[-80, -80], [80, 80], [-80, 80]] as const) {
      const [px, py] = worldToCanvas(v, corner[0], corner[1]);
      expect(px).toBeGreaterThanOrEqual(0);
      expect(px).toBeLessThanOrEqual(800);
      expect(py).toBeGreaterThanOrEqual(0);
      expect(py).toBeLessThanOrEqual(600);
    }
  });

  it("north (+y) renders upward", () => {
    const [, pyLow] = worldToCanvas(v, 0, -10);
    const [, pyHigh] = worldToCanvas(v, 0, 10);
    expect(pyHigh).toBeLessThan(pyLow);
  });
});

describe("sensor hit test", () => {
  it("finds the sensor under the cursor and misses elsewhere", () => {
    const v = fitViewport({ min: [-80, -80, 0], max: [80, 80, 20] }, 800, 600);
    const draft = addSensor(defaultDraft(LOB), "velodyne_vlp16", 10, 10, 5);
    const [px, py] = worldToCanvas(v, 10, 10);
    expect(sensorAt(v, draft, px + 2, py - 2)).toBe(0);
    expect(sensorAt(v, draft, px + 50, py)).toBe(-1);
  });
});

describe("api base resolution", () => {
  it("honors an explicit override", () => {
    expect(resolveApiBase("http://localhost:5173/?api=http://10.0.0.2:8000/"))
      .toBe("http://10.0.0.2:8000");
  });
  it("redirects dev-server ports to the service port", () => {
    expect(resolveApiBase("http://localhost:5173/index.html"))
      .toBe("http://localhost:8000");
  });
  it("keeps the origin when already on the service port", () => {
    expect(resolveApiBase("http://localhost:8000/ui/"))
      .toBe("http://localhost:8000");
  });
});
