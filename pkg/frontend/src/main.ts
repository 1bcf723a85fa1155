#!/usr/bin/env node
import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { renderHist, renderPairedHist, renderPolarScatter } from "./charts.js";
import { parseHist, parsePaired, parsePolar } from "./csv.js";
import { FigureJob, parseJobs } from "./jobs.js";
import { FIGURE_KINDS, InputError, isFigureKind } from "./schema.js";

const USAGE = `usage: render_figs --jobs JOBS.toml
       render_figs --csv IN.csv --kind KIND --out FIG.svg [--title T] [--color C]

Renders analysis CSVs to SVG. KIND is one of: ${FIGURE_KINDS.join(", ")}.
Exit codes: 0 ok, 1 usage error, 2 bad input.`;

class UsageError extends Error {}

export function renderJob(job: FigureJob): void {
  let csvText: string;
  try {
    csvText = readFileSync(job.inputCsv, "utf8");
  } catch {
    throw new InputError(`cannot read CSV file: ${job.inputCsv}`);
  }
  const opts = { title: job.title, color: job.color };
  let svg: string;
  if (job.kind === "hist") {
    svg = renderHist(parseHist(csvText), opts);
  } else if (job.kind === "polar_scatter") {
    svg = renderPolarScatter(parsePolar(csvText), opts);
  } else {
    svg = renderPairedHist(parsePaired(csvText), opts);
  }
  mkdirSync(dirname(job.outputPath), { recursive: true });
  writeFileSync(job.outputPath, svg);
  console.log(`wrote ${job.outputPath}`);
}

function jobsFromArgs(argv: string[]): FigureJob[] {
  const { values } = parseArgs({
    args: argv,
    options: {
      jobs: { type: "string" },
      csv: { type: "string" },
      kind: { type: "string" },
      out: { type: "string" },
      title: { type: "string" },
      color: { type: "string" },
      help: { type: "boolean", short: "h" },
    },
  });
  if (values.help) {
    console.log(USAGE);
    process.exit(0);
  }
  if (values.jobs !== undefined) {
    if (values.csv !== undefined || values.kind !== undefined || values.out !== undefined) {
      throw new UsageError("--jobs cannot be combined with --csv/--kind/--out");
    }
    const path = resolve(values.jobs);
    let text: string;
    try {
      text = readFileSync(path, "utf8");
    } catch {
      throw new InputError(`cannot read jobs file: ${path}`);
    }
    return parseJobs(text, path);
  }
  if (values.csv === undefined || values.kind === undefined || values.out === undefined) {
    throw new UsageError("need either --jobs, or all of --csv, --kind and --out");
  }
  if (!isFigureKind(values.kind)) {
    throw new UsageError(`unknown kind "${values.kind}", expected one of: ${FIGURE_KINDS.join(", ")}`);
  }
  return [
    {
      inputCsv: resolve(values.csv),
      kind: values.kind,
      outputPath: resolve(values.out),
      title: values.title,
      color: values.color,
    },
  ];
}

export function main(argv: string[]): number {
  let jobs: FigureJob[];
  try {
    jobs = jobsFromArgs(argv);
  } catch (err) {
    if (err instanceof InputError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    console.error(USAGE);
    return 1;
  }
  for (const job of jobs) {
    try {
      renderJob(job);
    } catch (err) {
      if (err instanceof InputError) {
        console.error(`error: ${err.message}`);
        return 2;
      }
      throw err;
    }
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
