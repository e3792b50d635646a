import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8")) as T;
}

/** Every decimal-pointed number rendered by the UI must be traceable to a
 * value in the source payload; this collects the admissible spellings. */
export function admissibleNumberStrings(payload: unknown): Set<string> {
  const allowed = new Set<string>();
  const visit = (node: unknown): void => {
    if (typeof node === "number") {
      allowed.add(String(node));
      allowed.add(node.toFixed(2));
      allowed.add(node.toFixed(4));
      allowed.add((node >= 0 ? "+" : "") + node.toFixed(4));
    } else if (typeof node === "string") {
      if (/^-?\d+(\.\d+)?$/.test(node)) allowed.add(node);
    } else if (Array.isArray(node)) {
      node.forEach(visit);
    } else if (node !== null && typeof node === "object") {
      Object.values(node).forEach(visit);
    }
  };
  visit(payload);
  return allowed;
}

export function decimalsIn(html: string): string[] {
  return html.match(/[+-]?\d+\.\d+/g) ?? [];
}
