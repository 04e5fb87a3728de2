/** DOM wiring for the what-if modeller page.
 *
 * Reads the form, keeps the permalink in sync, and re-queries the API on
 * every change through LatestWins so only the newest response is painted.
 */

import { ApiClient, LatestWins, type ProjectResponse } from "./api.js";
import {
  DEFAULT_FORM,
  clampCpiPercent,
  clampSalary,
  decodePermalink,
  encodePermalink,
  toRequest,
  validateForm,
  type ScenarioForm,
} from "./form.js";
import {
  renderComparison,
  renderError,
  renderTrajectoryChart,
  renderWarnings,
} from "./render.js";

const byId = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function readForm(): ScenarioForm {
  return {
    dob: byId<HTMLInputElement>("dob").value,
    salary: clampSalary(Number(byId<HTMLInputElement>("salary").value)),
    cpiPercent: clampCpiPercent(Number(byId<HTMLInputElement>("cpi").value)),
    growthPercent: Number(byId<HTMLInputElement>("growth").value),
    rulesOld: byId<HTMLSelectElement>("rules-old").value,
    rulesNew: byId<HTMLSelectElement>("rules-new").value,
    interpolation: byId<HTMLInputElement>("interp-geometric").checked
      ? "geometric"
      : "linear",
    devaluation: DEFAULT_FORM.devaluation,
  };
}

function writeForm(form: ScenarioForm): void {
  byId<HTMLInputElement>("dob").value = form.dob;
  byId<HTMLInputElement>("salary").value = String(form.salary);
  byId<HTMLInputElement>("cpi").value = String(form.cpiPercent);
  byId<HTMLInputElement>("growth").value = String(form.growthPercent);
  byId<HTMLSelectElement>("rules-old").value = form.rulesOld;
  byId<HTMLSelectElement>("rules-new").value = form.rulesNew;
  byId<HTMLInputElement>("interp-geometric").checked =
    form.interpolation === "geometric";
}

export function start(): void {
  const params = new URLSearchParams(window.location.search);
  const client = new ApiClient(params.get("api") ?? "");
  const inflight = new LatestWins<ProjectResponse>();
  const results = byId<HTMLElement>("results");
  const chart = byId<HTMLElement>("chart");
  const notices = byId<HTMLElement>("notices");

  const decoded = decodePermalink(window.location.search);
  notices.innerHTML = renderWarnings(decoded.warnings);

  async function refresh(): Promise<void> {
    const form = readForm();
    byId<HTMLOutputElement>("cpi-value").textContent =
      `${form.cpiPercent.toFixed(1)}%`;

    const query = encodePermalink(form);
    const api = params.get("api");
    const permalink = [query, api ? `api=${encodeURIComponent(api)}` : ""]
      .filter(Boolean)
      .join("&");
    history.replaceState(null, "", permalink ? `?${permalink}` : location.pathname);

    const issues = validateForm(form);
    if (issues.length > 0) {
      notices.innerHTML = renderError(
        issues.map((i) => i.message).join("; "),
      );
      return;
    }
    try {
      const response = await inflight.run((signal) =>
        client.project(toRequest(form), signal),
      );
      if (!response) return; // superseded by a newer request
      notices.innerHTML = "";
      results.innerHTML = renderComparison(response, form.interpolation);
      chart.innerHTML = renderTrajectoryChart(response);
    } catch (error) {
      notices.innerHTML = renderError(
        error instanceof Error ? error.message : String(error),
      );
    }
  }

  void (async () => {
    try {
      const presets = await client.presets();
      for (const id of ["rules-old", "rules-new"]) {
        const select = byId<HTMLSelectElement>(id);
        select.innerHTML = "";
        for (const preset of presets) {
          const option = document.createElement("option");
          option.value = preset.id;
          option.textContent = preset.id;
          select.append(option);
        }
      }
    } catch {
      // keep the hard-coded default pair if the registry is unreachable
    }
    writeForm(decoded.form);
    for (const id of ["dob", "salary", "cpi", "growth", "rules-old",
                      "rules-new", "interp-geometric"]) {
      byId(id).addEventListener("input", () => void refresh());
      byId(id).addEventListener("change", () => void refresh());
    }
    await refresh();
  })();
}

if (typeof document !== "undefined" && document.getElementById("results")) {
  start();
}
