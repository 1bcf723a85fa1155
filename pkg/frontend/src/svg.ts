export type Attrs = Record<string, string | number>;

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(tag: string, attrs: Attrs = {}, body = ""): string {
  const parts = Object.entries(attrs).map(([key, value]) => `${key}="${esc(String(value))}"`);
  const open = parts.length > 0 ? `<${tag} ${parts.join(" ")}` : `<${tag}`;
  return body === "" ? `${open}/>` : `${open}>${body}</${tag}>`;
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  return el("text", { x: round(x), y: round(y), ...attrs }, esc(content));
}

/** Two decimal places is plenty for pixel coordinates and keeps output diffable. */
export function round(value: number): number {
  return Math.round(value * 100) / 100;
}

/** Short tick-label formatting: trims trailing zeros from a 3-significant-digit float. */
export function fmt(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 0.01 && abs < 10000) {
    return String(Number(value.toPrecision(3)));
  }
  return value.toExponential(1);
}

export function svgDocument(width: number, height: number, body: string[]): string {
  const attrs: Attrs = {
    xmlns: "http://www.w3.org/2000/svg",
    width,
    height,
    viewBox: `0 0 ${width} ${height}`,
    "font-family": "sans-serif",
    "font-size": 12,
  };
  return el("svg", attrs, body.join("")) + "\n";
}
