// Client-side mirrors of the validation the API enforces, so obviously bad
// forms never produce a request.

import type { OffsetInstance } from "./types.js";

const MONTH_RE = /^\d{4}-(0[1-9]|1[0-2])$/;
export const MAX_HORIZON_MONTHS = 12;

export function isValidMonth(month: string): boolean {
  return MONTH_RE.test(month);
}

export function validateHorizon(n: number): string | null {
  if (!Number.isInteger(n) || n < 1 || n > MAX_HORIZON_MONTHS) {
    return `horizon must be an integer in [1, ${MAX_HORIZON_MONTHS}]`;
  }
  return null;
}

export function validateRates(green: number, conventional: number): string | null {
  if (!(green > 0) || !(conventional > 0)) {
    return "both rates must be positive numbers";
  }
  return null;
}

export function validateAskGrid(start: number, stop: number, step: number): string | null {
  if (![start, stop, step].every(Number.isFinite)) {
    return "grid bounds must be numbers";
  }
  if (start < 0) return "grid start must be ≥ 0";
  if (step <= 0) return "grid step must be positive";
  if (stop < start) return "grid stop must be ≥ start";
  return null;
}

export function buildAskGrid(start: number, stop: number, step: number): number[] {
  const grid: number[] = [];
  for (let ask = start; ask <= stop + 1e-9; ask += step) {
    grid.push(ask);
  }
  return grid;
}

/** All violations of the offset-instance invariants, empty when valid. */
export function validateOffsetInstance(instance: OffsetInstance): string[] {
  const problems: string[] = [];
  if (instance.mode === "max_offset") {
    if (instance.budget === null || !(instance.budget > 0) ||
        !Number.isInteger(instance.budget)) {
      problems.push("budget must be a positive integer (minor units)");
    }
  } else if (instance.mode === "min_cost") {
    if (instance.target_offset === null || instance.target_offset < 0 ||
        !Number.isInteger(instance.target_offset)) {
      problems.push("target offset must be a non-negative integer (MTCO2e)");
    }
  } else {
    problems.push(`unknown mode ${String(instance.mode)}`);
  }
  if (instance.projects.length === 0) {
    problems.push("at least one project is required");
  }
  let shareSum = 0;
  for (const p of instance.projects) {
    if (!p.name.trim()) {
      problems.push("every project needs a name");
    }
    if (!Number.isInteger(p.unit_cost) || p.unit_cost <= 0) {
      problems.push(`project ${p.name}: unit cost must be a positive integer`);
    }
    if (!(p.min_share >= 0) || p.min_share > 1) {
      problems.push(`project ${p.name}: share floor must be in [0, 1]`);
    }
    if (p.enabled) shareSum += p.min_share;
  }
  if (shareSum > 1 + 1e-9) {
    problems.push(
      `enabled share floors sum to ${shareSum.toFixed(3)}, must be ≤ 1`,
    );
  }
  return problems;
}
