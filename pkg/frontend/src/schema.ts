export type FigureKind = "hist" | "polar_scatter" | "paired_hist";

export const FIGURE_KINDS: FigureKind[] = ["hist", "polar_scatter", "paired_hist"];

/** Required CSV columns per figure kind, in header order as the producer writes them. */
export const KIND_COLUMNS: Record<FigureKind, string[]> = {
  hist: ["bin_lo", "bin_hi", "count"],
  polar_scatter: ["entity", "dim", "radius", "angle"],
  paired_hist: ["pair_id", "label", "diff_signs"],
};

/** Bad input of any sort: unreadable CSV, header mismatch, malformed job file. */
export class InputError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "InputError";
  }
}

export function isFigureKind(value: string): value is FigureKind {
  return (FIGURE_KINDS as string[]).includes(value);
}

/**
 * Verify that a parsed header carries every column the kind requires.
 * Extra columns are tolerated; missing ones are all named in the error.
 */
export function checkHeader(fields: string[] | undefined, kind: FigureKind): void {
  const required = KIND_COLUMNS[kind];
  const seen = new Set(fields ?? []);
  const missing = required.filter((c) => !seen.has(c));
  if (missing.length > 0) {
    const noun = missing.length === 1 ? "column" : "columns";
    const names = missing.map((c) => `"${c}"`).join(", ");
    throw new InputError(`missing ${noun} ${names} for kind "${kind}"`);
  }
}
