// Thin HTTP client for the evaluation service.

import type {
  EvaluateRequest,
  EvaluateResponse,
  PresetInfo,
  SceneSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return resp.json() as Promise<T>;
  }

  health(): Promise<{ status: string; backend: string }> {
    return this.get("/api/health");
  }

  scene(): Promise<SceneSummary> {
    return this.get("/api/scene");
  }

  async presets(): Promise<PresetInfo[]> {
    const body = await this.get<{ presets: PresetInfo[] }>("/api/presets");
    return body.presets;
  }

  async evaluate(req: EvaluateRequest): Promise<EvaluateResponse> {
    const resp = await fetch(this.baseUrl + "/api/evaluate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    if (resp.status === 422) {
      throw new ApiError(422, "empty region of interest: no points landed in the LOB");
    }
    if (!resp.ok) {
      let detail = await resp.text();
      try {
        const parsed = JSON.parse(detail);
        if (Array.isArray(parsed.detail)) {
          detail = parsed.detail
            .map((e: { field: string; message: string }) => `${e.field}: ${e.message}`)
            .join("; ");
        } else if (parsed.detail) {
          detail = String(parsed.detail);
        }
      } catch {
        /* keep raw text */
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json() as Promise<EvaluateResponse>;
  }
}

/** API base resolution: ?api=... query param, else same origin, else :8000. */
export function resolveApiBase(href: string): string {
  const url = new URL(href);
  const override = url.searchParams.get("api");
  if (override) return override.replace(/\/$/, "");
  if (url.protocol.startsWith("http") && url.port !== "" && url.port !== "8000") {
    return `${url.protocol}//${url.hostname}:8000`;
  }
  return url.origin;
}
