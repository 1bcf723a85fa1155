import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { renderHist, renderPairedHist, renderPolarScatter } from "../src/charts.js";
import { parseHist, parsePaired, parsePolar } from "../src/csv.js";

const FIXTURES = fileURLToPath(new URL("./fixtures/", import.meta.url));

function fixture(name: string): string {
  return readFileSync(FIXTURES + name, "utf8");
}

function countMatches(svg: string, pattern: RegExp): number {
  return (svg.match(pattern) ?? []).length;
}

// class="bar" on plain histograms, class="bar <label>" on paired ones
const BAR = /class="bar[" ]/g;
const POINT = /class="pt"/g;

describe("counts match the CSV contents for every bundled export", () => {
  it.each(["rel_mod_hist.csv", "rel_phase_hist.csv", "ent_mod_hist.csv"])(
    "histogram %s: one bar per CSV row",
    (name) => {
      const rows = parseHist(fixture(name));
      const svg = renderHist(rows, { title: name });
      expect(countMatches(svg, BAR)).toBe(rows.length);
    },
  );

  it("polar scatter: one point per CSV row", () => {
    const rows = parsePolar(fixture("polar.csv"));
    const svg = renderPolarScatter(rows);
    expect(countMatches(svg, POINT)).toBe(rows.length);
  });

  it("polar scatter: a 500-row input yields exactly 500 points", () => {
    const lines = fixture("polar.csv").trim().split("\n");
    const text = [lines[0], ...lines.slice(1, 501)].join("\n") + "\n";
    const rows = parsePolar(text);
    expect(rows.length).toBe(500);
    expect(countMatches(renderPolarScatter(rows), POINT)).toBe(500);
  });

  it("paired histogram: one bar per occupied (label, value) bin", () => {
    const rows = parsePaired(fixture("signs.csv"));
    const occupied = new Set(rows.map((r) => `${r.label}:${r.diffSigns}`));
    const svg = renderPairedHist(rows);
    expect(countMatches(svg, BAR)).toBe(occupied.size);
    expect(countMatches(svg, /class="bar linked"/g)).toBe(
      new Set(rows.filter((r) => r.label === "linked").map((r) => r.diffSigns)).size,
    );
  });
});

describe("renderHist", () => {
  it("renders a single-row input as one bar spanning the whole x range", () => {
    const svg = renderHist(parseHist("bin_lo,bin_hi,count\n2.5,3.5,7\n"));
    const bars = svg.match(/<rect class="bar"[^/]*\//g) ?? [];
    expect(bars.length).toBe(1);
    const x = Number(/ x="([-\d.]+)"/.exec(bars[0]!)![1]);
    const width = Number(/ width="([-\d.]+)"/.exec(bars[0]!)![1]);
    // the x domain is [bin_lo, bin_hi], so the one bar covers the plot area
    expect(x).toBeCloseTo(64, 6);
    expect(width).toBeCloseTo(640 - 64 - 24, 6);
  });

  it("is deterministic for identical input", () => {
    const rows = parseHist(fixture("ent_mod_hist.csv"));
    expect(renderHist(rows, { title: "t" })).toBe(renderHist(rows, { title: "t" }));
  });

  it("refuses empty input", () => {
    expect(() => renderHist([])).toThrow(/no bins/);
  });
});

describe("renderPairedHist", () => {
  it("shows capitalized legend entries for lowercase CSV labels", () => {
    const svg = renderPairedHist(parsePaired(fixture("signs.csv")));
    expect(svg).toContain(">Linked</text>");
    expect(svg).toContain(">Unlinked</text>");
    expect(svg).not.toContain(">linked</text>");
  });

  it("keeps both series on shared integer bins", () => {
    const text = "pair_id,label,diff_signs\n0,linked,1\n1,linked,1\n2,unlinked,3\n";
    const svg = renderPairedHist(parsePaired(text));
    expect(countMatches(svg, /class="bar linked"/g)).toBe(1);
    expect(countMatches(svg, /class="bar unlinked"/g)).toBe(1);
  });
});

describe("renderPolarScatter", () => {
  it("keeps log-scale exports with negative radii inside the disc", () => {
    const text = "entity,dim,radius,angle\n0,0,-0.3,0\n0,1,2.0,1.5707963\n0,2,8.0,3.1415926\n";
    const svg = renderPolarScatter(parsePolar(text));
    expect(countMatches(svg, POINT)).toBe(3);
    const coords = [...svg.matchAll(/class="pt" cx="([-\d.]+)" cy="([-\d.]+)"/g)];
    const cx = 64 + (640 - 64 - 24) / 2;
    const cy = 44 + (420 - 44 - 48) / 2;
    const R = Math.min(640 - 64 - 24, 420 - 44 - 48) / 2;
    for (const [, px, py] of coords) {
      const dist = Math.hypot(Number(px) - cx, Number(py) - cy);
      expect(dist).toBeLessThanOrEqual(R + 0.01);
    }
  });
});
