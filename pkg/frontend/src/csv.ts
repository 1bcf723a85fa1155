import Papa from "papaparse";

import { checkHeader, FigureKind, InputError } from "./schema.js";

export interface HistRow {
  binLo: number;
  binHi: number;
  count: number;
}

export interface PolarRow {
  entity: string;
  dim: number;
  radius: number;
  angle: number;
}

export interface PairRow {
  pairId: string;
  label: string;
  diffSigns: number;
}

type RawRow = Record<string, string>;

function numeric(row: RawRow, column: string, rowIndex: number): number {
  const raw = row[column];
  const value = Number(raw);
  if (raw === undefined || raw.trim() === "" || !Number.isFinite(value)) {
    // +2: one for the header line, one for 1-based numbering
    throw new InputError(`bad value ${JSON.stringify(raw ?? "")} in column "${column}" on line ${rowIndex + 2}`);
  }
  return value;
}

function integer(row: RawRow, column: string, rowIndex: number): number {
  const value = numeric(row, column, rowIndex);
  if (!Number.isInteger(value)) {
    throw new InputError(`expected integer in column "${column}" on line ${rowIndex + 2}, got ${value}`);
  }
  return value;
}

function parseRaw(text: string, kind: FigureKind): RawRow[] {
  const result = Papa.parse<RawRow>(text, { header: true, skipEmptyLines: true });
  if (result.errors.length > 0) {
    const first = result.errors[0]!;
    throw new InputError(`CSV parse failed: ${first.message} (row ${first.row ?? "?"})`);
  }
  checkHeader(result.meta.fields, kind);
  return result.data;
}

export function parseHist(text: string): HistRow[] {
  return parseRaw(text, "hist").map((row, i) => {
    const binLo = numeric(row, "bin_lo", i);
    const binHi = numeric(row, "bin_hi", i);
    const count = integer(row, "count", i);
    if (binHi <= binLo) {
      throw new InputError(`empty bin [${binLo}, ${binHi}] on line ${i + 2}`);
    }
    if (count < 0) {
      throw new InputError(`negative count on line ${i + 2}`);
    }
    return { binLo, binHi, count };
  });
}

export function parsePolar(text: string): PolarRow[] {
  return parseRaw(text, "polar_scatter").map((row, i) => ({
    entity: row["entity"] ?? "",
    dim: integer(row, "dim", i),
    radius: numeric(row, "radius", i),
    angle: numeric(row, "angle", i),
  }));
}

export function parsePaired(text: string): PairRow[] {
  return parseRaw(text, "paired_hist").map((row, i) => {
    const diffSigns = integer(row, "diff_signs", i);
    if (diffSigns < 0) {
      throw new InputError(`negative diff_signs on line ${i + 2}`);
    }
    const label = row["label"] ?? "";
    if (label === "") {
      throw new InputError(`empty label on line ${i + 2}`);
    }
    return { pairId: row["pair_id"] ?? "", label, diffSigns };
  });
}
