/**
 * Client-side mirrors of the server's input rules, so obviously bad input
 * never leaves the form. The server remains the authority; these checks
 * only gate submission.
 */

import type { FrameworkDoc } from "./api.js";

export const LEVEL_MIN = 1;
export const LEVEL_MAX = 5;

export function isValidLevel(value: number): boolean {
  return Number.isInteger(value) && value >= LEVEL_MIN && value <= LEVEL_MAX;
}

export interface CompletenessReport {
  complete: boolean;
  missing: string[];
  invalid: string[];
}

/** Ratings must cover every framework criterion exactly once, levels 1..5. */
export function checkCompleteness(
  framework: FrameworkDoc,
  ratings: Record<string, number | null>,
): CompletenessReport {
  const missing: string[] = [];
  const invalid: string[] = [];
  for (const criterion of framework.criteria) {
    const value = ratings[criterion.id];
    if (value === null || value === undefined) {
      missing.push(criterion.id);
    } else if (!isValidLevel(value)) {
      invalid.push(criterion.id);
    }
  }
  return { complete: missing.length === 0 && invalid.length === 0, missing, invalid };
}

/** Keyed input → level or null; out-of-range keystrokes are rejected here. */
export function parseLevelInput(raw: string): number | null {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return isValidLevel(value) ? value : null;
}
