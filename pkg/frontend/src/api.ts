/** Typed client for the pensionlab projection API.
 *
 * The UI never computes pension numbers itself: every displayed value
 * comes from these endpoints.
 */

export interface ProjectRequest {
  dob: string;
  salary: number;
  cpi: number;
  rules_old: string;
  rules_new: string;
  retirement_age?: number;
  salary_growth?: number | null;
  devaluation?: "uuk" | "uss";
  dc_option?: string;
}

export interface TrajectoryPoint {
  age: number;
  income: number;
}

export interface ProjectionSide {
  rules: string;
  income_66: number;
  income_86: number;
  db_66: number;
  dc_66: number;
  trajectory: TrajectoryPoint[];
}

export interface LossEntry {
  percent_loss: number;
  monetary_loss: number;
  geometric_fallback: boolean;
}

export interface ProjectResponse {
  request: Record<string, unknown>;
  old: ProjectionSide;
  new: ProjectionSide;
  loss: { linear: LossEntry; geometric: LossEntry };
}

export interface Preset {
  id: string;
  accrual_denominator: number;
  db_dc_threshold: number;
  cap: { kind: "hard" | "soft"; delay_years?: number };
}

export interface ApiError {
  errors: { field: string; message: string }[];
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  async project(
    request: ProjectRequest,
    signal?: AbortSignal,
  ): Promise<ProjectResponse> {
    const response = await fetch(`${this.baseUrl}/api/project`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    if (!response.ok) {
      const body = (await response.json().catch(() => null)) as ApiError | null;
      const detail = body?.errors
        ?.map((e) => `${e.field}: ${e.message}`)
        .join("; ");
      throw new Error(detail ?? `request failed (${response.status})`);
    }
    return (await response.json()) as ProjectResponse;
  }

  async presets(signal?: AbortSignal): Promise<Preset[]> {
    const response = await fetch(`${this.baseUrl}/api/presets`, { signal });
    if (!response.ok) throw new Error(`presets failed (${response.status})`);
    const body = (await response.json()) as { presets: Preset[] };
    return body.presets;
  }
}

/** Serializes in-flight requests so only the latest result wins.
 *
 * Each new submission aborts the previous fetch; a response is only
 * delivered if no newer submission has started since, so rapid slider
 * changes can never paint a stale projection.
 */
export class LatestWins<T> {
  private controller: AbortController | null = null;
  private ticket = 0;

  async run(
    task: (signal: AbortSignal) => Promise<T>,
  ): Promise<T | undefined> {
    this.controller?.abort();
    this.controller = new AbortController();
    const ticket = ++this.ticket;
    try {
      const result = await task(this.controller.signal);
      return ticket === this.ticket ? result : undefined;
    } catch (error) {
      if (error instanceof DOMException && error.name === "AbortError") {
        return undefined;
      }
      if (ticket !== this.ticket) return undefined;
      throw error;
    }
  }
}
