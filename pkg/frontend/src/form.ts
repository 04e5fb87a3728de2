/** Scenario form state: defaults, validation, permalinks, request mapping.
 *
 * Client-side validation mirrors the server's 400 rules so a valid form
 * always produces a schema-valid request.
 */

import type { ProjectRequest } from "./api.js";

export interface ScenarioForm {
  dob: string;
  salary: number;
  /** CPI in percent for the slider (0-5, steps of 0.1). */
  cpiPercent: number;
  /** Salary growth in percent. */
  growthPercent: number;
  rulesOld: string;
  rulesNew: string;
  interpolation: "linear" | "geometric";
  devaluation: "uuk" | "uss";
}

export const DEFAULT_FORM: ScenarioForm = {
  dob: "1985-10-01",
  salary: 30000,
  cpiPercent: 2.5,
  growthPercent: 4.0,
  rulesOld: "uss2021",
  rulesNew: "uuk2021",
  interpolation: "linear",
  devaluation: "uss",
};

const clamp = (value: number, lo: number, hi: number): number =>
  Math.min(hi, Math.max(lo, value));

/** Round to the slider grid and clamp into the modeller's CPI range. */
export function clampCpiPercent(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_FORM.cpiPercent;
  return clamp(Math.round(value * 10) / 10, 0, 5);
}

export function clampSalary(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_FORM.salary;
  return clamp(value, 0, 10_000_000);
}

export interface FormIssue {
  field: keyof ScenarioForm;
  message: string;
}

const DATE_SHAPE = /^\d{4}-\d{2}-\d{2}$/;

export function validateForm(form: ScenarioForm): FormIssue[] {
  const issues: FormIssue[] = [];
  if (!DATE_SHAPE.test(form.dob) || Number.isNaN(Date.parse(form.dob))) {
    issues.push({ field: "dob", message: "date of birth must be YYYY-MM-DD" });
  }
  if (!(form.salary >= 0)) {
    issues.push({ field: "salary", message: "salary must be >= 0" });
  }
  if (form.cpiPercent < 0 || form.cpiPercent > 5) {
    issues.push({ field: "cpiPercent", message: "CPI must be within 0-5%" });
  }
  if (form.growthPercent < 0 || form.growthPercent > 10) {
    issues.push({
      field: "growthPercent",
      message: "salary growth must be within 0-10%",
    });
  }
  return issues;
}

export function toRequest(form: ScenarioForm): ProjectRequest {
  return {
    dob: form.dob,
    salary: clampSalary(form.salary),
    cpi: clampCpiPercent(form.cpiPercent) / 100,
    rules_old: form.rulesOld,
    rules_new: form.rulesNew,
    salary_growth: form.growthPercent / 100,
    devaluation: form.devaluation,
    dc_option: "annuity",
  };
}

/** Query-string keys, stable for permalinks. */
const KEYS: Record<string, keyof ScenarioForm> = {
  dob: "dob",
  salary: "salary",
  cpi: "cpiPercent",
  growth: "growthPercent",
  old: "rulesOld",
  new: "rulesNew",
  interp: "interpolation",
  dev: "devaluation",
};

/** Encode only the fields that differ from the defaults: the default
 * form round-trips to an empty query. */
export function encodePermalink(form: ScenarioForm): string {
  const params = new URLSearchParams();
  for (const [key, field] of Object.entries(KEYS)) {
    const value = form[field];
    if (value !== DEFAULT_FORM[field]) params.set(key, String(value));
  }
  return params.toString();
}

export interface DecodeResult {
  form: ScenarioForm;
  warnings: string[];
}

/** Decode a permalink query; malformed parts fall back to defaults with
 * a warning rather than failing. */
export function decodePermalink(query: string): DecodeResult {
  const form: ScenarioForm = { ...DEFAULT_FORM };
  const warnings: string[] = [];
  let params: URLSearchParams;
  try {
    params = new URLSearchParams(query.replace(/^\?/, ""));
  } catch {
    return { form, warnings: ["unreadable permalink; using defaults"] };
  }
  for (const [key, raw] of params.entries()) {
    const field = KEYS[key];
    if (!field) {
      warnings.push(`ignored unknown parameter "${key}"`);
      continue;
    }
    switch (field) {
      case "salary": {
        const value = Number(raw);
        if (Number.isFinite(value) && value >= 0) form.salary = clampSalary(value);
        else warnings.push(`invalid salary "${raw}"; using default`);
        break;
      }
      case "cpiPercent": {
        const value = Number(raw);
        if (Number.isFinite(value) && value >= 0 && value <= 5) {
          form.cpiPercent = clampCpiPercent(value);
        } else warnings.push(`invalid cpi "${raw}"; using default`);
        break;
      }
      case "growthPercent": {
        const value = Number(raw);
        if (Number.isFinite(value) && value >= 0 && value <= 10) {
          form.growthPercent = value;
        } else warnings.push(`invalid growth "${raw}"; using default`);
        break;
      }
      case "dob": {
        if (DATE_SHAPE.test(raw) && !Number.isNaN(Date.parse(raw))) {
          form.dob = raw;
        } else warnings.push(`invalid dob "${raw}"; using default`);
        break;
      }
      case "interpolation": {
        if (raw === "linear" || raw === "geometric") form.interpolation = raw;
        else warnings.push(`invalid interpolation "${raw}"; using default`);
        break;
      }
      case "devaluation": {
        if (raw === "uuk" || raw === "uss") form.devaluation = raw;
        else warnings.push(`invalid devaluation "${raw}"; using default`);
        break;
      }
      default: {
        // rule-set ids; let the server reject unknown ones with a 400
        if (/^[\w-]+$/.test(raw)) form[field] = raw;
        else warnings.push(`invalid ${key} "${raw}"; using default`);
      }
    }
  }
  return { form, warnings };
}
