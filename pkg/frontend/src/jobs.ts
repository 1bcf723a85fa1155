import { parse } from "smol-toml";
import { dirname, resolve } from "node:path";

import { FigureKind, InputError, isFigureKind } from "./schema.js";

export interface FigureJob {
  inputCsv: string;
  kind: FigureKind;
  outputPath: string;
  title?: string;
  color?: string;
}

function requireString(table: Record<string, unknown>, key: string, index: number): string {
  const value = table[key];
  if (typeof value !== "string" || value === "") {
    throw new InputError(`job ${index + 1}: missing or non-string "${key}"`);
  }
  return value;
}

function optionalString(table: Record<string, unknown>, key: string, index: number): string | undefined {
  const value = table[key];
  if (value === undefined) return undefined;
  if (typeof value !== "string") {
    throw new InputError(`job ${index + 1}: "${key}" must be a string`);
  }
  return value;
}

/**
 * Parse a jobs TOML document: an array of [[jobs]] tables with input_csv,
 * kind, and output_path, plus optional title and color. Relative paths are
 * resolved against the TOML file's own directory.
 */
export function parseJobs(tomlText: string, tomlPath: string): FigureJob[] {
  let doc: Record<string, unknown>;
  try {
    doc = parse(tomlText);
  } catch (err) {
    throw new InputError(`could not parse jobs file: ${err instanceof Error ? err.message : String(err)}`);
  }
  const jobs = doc["jobs"];
  if (!Array.isArray(jobs) || jobs.length === 0) {
    throw new InputError('jobs file needs at least one [[jobs]] table');
  }
  const base = dirname(resolve(tomlPath));
  return jobs.map((entry, index) => {
    if (typeof entry !== "object" || entry === null || Array.isArray(entry)) {
      throw new InputError(`job ${index + 1}: expected a table`);
    }
    const table = entry as Record<string, unknown>;
    const kind = requireString(table, "kind", index);
    if (!isFigureKind(kind)) {
      throw new InputError(`job ${index + 1}: unknown kind "${kind}"`);
    }
    return {
      inputCsv: resolve(base, requireString(table, "input_csv", index)),
      kind,
      outputPath: resolve(base, requireString(table, "output_path", index)),
      title: optionalString(table, "title", index),
      color: optionalString(table, "color", index),
    };
  });
}
