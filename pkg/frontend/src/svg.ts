/**
 * Minimal SVG figure primitives: linear scales, nice ticks, polyline paths,
 * and the document frame. No DOM, no dependencies; everything is string
 * assembly so output is deterministic.
 */

export interface LinearScale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number
): LinearScale {
  const span = d1 - d0;
  const f = ((v: number) =>
    span === 0 ? (r0 + r1) / 2 : r0 + ((v - d0) / span) * (r1 - r0)) as LinearScale;
  f.domain = [d0, d1];
  return f;
}

/** Round-numbered tick positions covering [lo, hi], roughly n of them. */
export function ticks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(1, n);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (mag * m >= rawStep) {
      step = mag * m;
      break;
    }
  }
  const out: number[] = [];
  const start = Math.ceil(lo / step - 1e-9) * step;
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

/** Shortest unambiguous tick label. */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return String(parseFloat(v.toPrecision(6)));
}

const XML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeXml(s: string): string {
  return s.replace(/[&<>"]/g, (c) => XML_ESCAPES[c]);
}

/** M/L path through the points that fall inside both scales' domains. */
export function polylinePath(
  xs: number[],
  ys: number[],
  sx: LinearScale,
  sy: LinearScale
): string {
  const [x0, x1] = sx.domain;
  const parts: string[] = [];
  let pen = false;
  for (let i = 0; i < xs.length; i++) {
    const x = xs[i];
    if (x < x0 || x > x1 || !Number.isFinite(ys[i])) {
      pen = false;
      continue;
    }
    const cmd = pen ? "L" : "M";
    parts.push(`${cmd}${sx(x).toFixed(2)},${sy(ys[i]).toFixed(2)}`);
    pen = true;
  }
  return parts.join(" ");
}

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
}

export const DEFAULT_FRAME: Frame = {
  width: 800,
  height: 500,
  margin: { top: 40, right: 30, bottom: 56, left: 78 },
};

export function axes(
  frame: Frame,
  sx: LinearScale,
  sy: LinearScale,
  xLabel: string,
  yLabel: string
): string {
  const { margin, width, height } = frame;
  const x0 = margin.left;
  const x1 = width - margin.right;
  const y0 = height - margin.bottom;
  const y1 = margin.top;
  const parts: string[] = [];
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" ` +
      `fill="none" stroke="#333" stroke-width="1"/>`
  );
  for (const v of ticks(sx.domain[0], sx.domain[1])) {
    const px = sx(v).toFixed(2);
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#333"/>`,
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle" ` +
        `font-size="12">${fmtTick(v)}</text>`
    );
  }
  for (const v of ticks(sy.domain[0], sy.domain[1])) {
    const py = sy(v).toFixed(2);
    parts.push(
      `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`,
      `<text x="${x0 - 9}" y="${py}" text-anchor="end" dominant-baseline="middle" ` +
        `font-size="12">${fmtTick(v)}</text>`
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${height - 12}" text-anchor="middle" ` +
      `font-size="14">${escapeXml(xLabel)}</text>`,
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="14" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`
  );
  return parts.join("\n");
}

export function svgDocument(frame: Frame, body: string, title: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" ` +
    `height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}" ` +
    `font-family="sans-serif">\n` +
    `<title>${escapeXml(title)}</title>\n` +
    `<rect width="${frame.width}" height="${frame.height}" fill="white"/>\n` +
    body +
    `\n</svg>\n`
  );
}
