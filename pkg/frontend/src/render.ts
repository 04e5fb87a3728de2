/** Pure HTML/SVG string renderers.
 *
 * Every number shown comes straight from the API response; nothing is
 * recomputed client-side. Keeping these as string builders makes them
 * testable without a DOM.
 */

import type { ProjectResponse, ProjectionSide, TrajectoryPoint } from "./api.js";

const escapeHtml = (text: string): string =>
  text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

export const formatMoney = (value: number): string =>
  `£${Math.round(value).toLocaleString("en-GB")}`;

export const formatPercent = (fraction: number): string =>
  `${(fraction * 100).toFixed(1)}%`;

function sideCard(title: string, side: ProjectionSide): string {
  return [
    `<div class="side-card" data-rules="${escapeHtml(side.rules)}">`,
    `<h3>${escapeHtml(title)} <code>${escapeHtml(side.rules)}</code></h3>`,
    `<dl>`,
    `<dt>Income at 66</dt><dd data-field="income-66">${formatMoney(side.income_66)}</dd>`,
    `<dt>Income at 86</dt><dd data-field="income-86">${formatMoney(side.income_86)}</dd>`,
    `<dt>Defined benefit at 66</dt><dd>${formatMoney(side.db_66)}</dd>`,
    `<dt>Defined contribution at 66</dt><dd>${formatMoney(side.dc_66)}</dd>`,
    `</dl>`,
    `</div>`,
  ].join("\n");
}

/** Side-by-side incomes plus the headline loss, all from the response. */
export function renderComparison(
  response: ProjectResponse,
  interpolation: "linear" | "geometric",
): string {
  const loss = response.loss[interpolation];
  const fallback =
    loss.geometric_fallback && interpolation === "geometric"
      ? ` <span class="note">(averaged linearly: income reaches zero)</span>`
      : "";
  return [
    `<div class="headline">`,
    `<p>Projected lifetime retirement loss: ` +
      `<strong data-field="percent-loss">${formatPercent(loss.percent_loss)}</strong>` +
      ` (<span data-field="monetary-loss">${formatMoney(loss.monetary_loss)}</span>` +
      ` over retirement)${fallback}</p>`,
    `</div>`,
    `<div class="sides">`,
    sideCard("Pre-change rules", response.old),
    sideCard("Post-change rules", response.new),
    `</div>`,
  ].join("\n");
}

export interface ChartOptions {
  width?: number;
  height?: number;
  pad?: number;
}

function polylinePoints(
  trajectory: TrajectoryPoint[],
  maxIncome: number,
  width: number,
  height: number,
  pad: number,
): string {
  const ages = trajectory.map((p) => p.age);
  const minAge = Math.min(...ages);
  const maxAge = Math.max(...ages);
  const spanAge = maxAge - minAge || 1;
  const spanY = maxIncome || 1;
  return trajectory
    .map((p) => {
      const x = pad + ((p.age - minAge) / spanAge) * (width - 2 * pad);
      const y = height - pad - (p.income / spanY) * (height - 2 * pad);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

/** SVG chart of both retirement trajectories. Endpoint labels repeat the
 * age-66 and age-86 incomes so they visibly match the cards. */
export function renderTrajectoryChart(
  response: ProjectResponse,
  options: ChartOptions = {},
): string {
  const width = options.width ?? 640;
  const height = options.height ?? 280;
  const pad = options.pad ?? 36;
  const all = [...response.old.trajectory, ...response.new.trajectory];
  const maxIncome = Math.max(1, ...all.map((p) => p.income));
  const oldPts = polylinePoints(response.old.trajectory, maxIncome, width, height, pad);
  const newPts = polylinePoints(response.new.trajectory, maxIncome, width, height, pad);
  const label = (side: ProjectionSide, cls: string, dy: number): string => {
    const first = side.trajectory[0];
    const last = side.trajectory[side.trajectory.length - 1];
    if (!first || !last) return "";
    return (
      `<text class="${cls}" x="${pad}" y="${12 + dy}">` +
      `66: ${formatMoney(first.income)} → 86: ${formatMoney(last.income)}</text>`
    );
  };
  return [
    `<svg viewBox="0 0 ${width} ${height}" role="img" aria-label="Retirement income trajectories">`,
    `<line class="axis" x1="${pad}" y1="${height - pad}" x2="${width - pad}" y2="${height - pad}"/>`,
    `<line class="axis" x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}"/>`,
    `<polyline class="line-old" fill="none" points="${oldPts}"/>`,
    `<polyline class="line-new" fill="none" points="${newPts}"/>`,
    label(response.old, "label-old", 0),
    label(response.new, "label-new", 16),
    `</svg>`,
  ].join("\n");
}

/** Inline error banner; the form stays as-is so the user can correct it. */
export function renderError(message: string): string {
  return `<div class="error-banner" role="alert">${escapeHtml(message)}</div>`;
}

export function renderWarnings(warnings: string[]): string {
  if (warnings.length === 0) return "";
  const items = warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
  return `<div class="warning-banner"><ul>${items}</ul></div>`;
}
