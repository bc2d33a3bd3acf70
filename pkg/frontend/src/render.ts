/**
 * Figure assembly for the four supported styles.
 *
 *   profile                  <E^2> vs x over the whole cavity
 *   profile-zoom-overlay     <E^2> vs x near the front (default x in [0.45, 0.55])
 *   excitation               p3 vs t with the causality-time marker at t = 0.5
 *   excitation-zoom-overlay  p3 vs t near the causality time (default t in [0.4, 0.6])
 *
 * Overlays distinguish mode counts by line style, fewest modes dashed,
 * most modes continuous; inputs are ordered by the mode count parsed from
 * their filenames (input order is kept when counts are unavailable).
 */

import * as fs from "fs";
import * as path from "path";

import {
  ProfileData,
  SeriesData,
  readProfile,
  readSeries,
  SchemaError,
} from "./csv";
import {
  DEFAULT_FRAME,
  Frame,
  axes,
  escapeXml,
  linearScale,
  polylinePath,
  svgDocument,
} from "./svg";

export const STYLES = [
  "profile",
  "profile-zoom-overlay",
  "excitation",
  "excitation-zoom-overlay",
] as const;

export type Style = (typeof STYLES)[number];

export interface PlotSpec {
  style: Style;
  inputs: string[];
  labels?: string[];
  zoom?: [number, number];
  out: string;
}

export const CAUSALITY_TIME = 0.5;

const DASHED = "9 6";
const DOTTED = "2 5";
const SOLID = "";

/**
 * stroke-dasharray per curve, index 0 = fewest modes.  The last (highest
 * count) is always continuous; the first of an overlay is always dashed;
 * anything between is dotted.
 */
export function lineStyles(n: number): string[] {
  if (n <= 0) return [];
  if (n === 1) return [SOLID];
  const out: string[] = [DASHED];
  for (let i = 1; i < n - 1; i++) out.push(DOTTED);
  out.push(SOLID);
  return out;
}

export function defaultZoom(style: Style): [number, number] | null {
  if (style === "profile-zoom-overlay") return [0.45, 0.55];
  if (style === "excitation-zoom-overlay") return [0.4, 0.6];
  return null;
}

function sortByModeCount<T extends { modeCount: number | null }>(data: T[]): T[] {
  const withCounts = data.every((d) => d.modeCount !== null);
  if (!withCounts) return data.slice();
  return data.slice().sort((a, b) => (a.modeCount! - b.modeCount!));
}

function yMaxInWindow(
  curves: { xs: number[]; ys: number[] }[],
  lo: number,
  hi: number
): number {
  let best = 0;
  for (const c of curves) {
    for (let i = 0; i < c.xs.length; i++) {
      if (c.xs[i] >= lo && c.xs[i] <= hi && c.ys[i] > best) best = c.ys[i];
    }
  }
  return best > 0 ? best : 1;
}

function legend(frame: Frame, entries: { label: string; dash: string }[]): string {
  const x = frame.width - frame.margin.right - 190;
  const y0 = frame.margin.top + 14;
  const parts: string[] = [];
  entries.forEach((e, i) => {
    const y = y0 + 20 * i;
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 42}" y2="${y - 4}" stroke="#000" ` +
        `stroke-width="1.5"${e.dash ? ` stroke-dasharray="${e.dash}"` : ""}/>`,
      `<text x="${x + 50}" y="${y}" font-size="12">${escapeXml(e.label)}</text>`
    );
  });
  return parts.join("\n");
}

function buildCurvesSvg(
  curves: { xs: number[]; ys: number[]; label: string }[],
  window: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
  marker: number | null
): string {
  const frame = DEFAULT_FRAME;
  const [lo, hi] = window;
  const yMax = yMaxInWindow(curves, lo, hi);
  const sx = linearScale(lo, hi, frame.margin.left, frame.width - frame.margin.right);
  const sy = linearScale(
    0,
    yMax * 1.06,
    frame.height - frame.margin.bottom,
    frame.margin.top
  );
  const dashes = lineStyles(curves.length);
  const parts: string[] = [];
  parts.push(axes(frame, sx, sy, xLabel, yLabel));
  if (marker !== null && marker >= lo && marker <= hi) {
    const px = sx(marker).toFixed(2);
    parts.push(
      `<line x1="${px}" y1="${frame.margin.top}" x2="${px}" ` +
        `y2="${frame.height - frame.margin.bottom}" stroke="#888" ` +
        `stroke-width="1" stroke-dasharray="4 4"/>`,
      `<text x="${px}" y="${frame.margin.top - 6}" text-anchor="middle" ` +
        `font-size="11" fill="#555">t = ${marker}</text>`
    );
  }
  curves.forEach((c, i) => {
    const d = polylinePath(c.xs, c.ys, sx, sy);
    const dash = dashes[i] ? ` stroke-dasharray="${dashes[i]}"` : "";
    parts.push(
      `<path d="${d}" fill="none" stroke="#000" stroke-width="1.4"${dash}/>`
    );
  });
  if (curves.length > 1) {
    parts.push(
      legend(
        frame,
        curves.map((c, i) => ({ label: c.label, dash: dashes[i] }))
      )
    );
  }
  parts.push(
    `<text x="${frame.margin.left}" y="22" font-size="14" ` +
      `font-weight="bold">${escapeXml(title)}</text>`
  );
  return svgDocument(frame, parts.join("\n"), title);
}

export function buildSvg(spec: PlotSpec): string {
  if (!STYLES.includes(spec.style)) {
    throw new SchemaError(
      `unknown style '${spec.style}'; expected one of ${STYLES.join(", ")}`
    );
  }
  if (spec.inputs.length === 0) {
    throw new SchemaError("at least one --input CSV is required");
  }
  if (spec.labels && spec.labels.length !== spec.inputs.length) {
    throw new SchemaError(
      `${spec.labels.length} labels for ${spec.inputs.length} inputs`
    );
  }
  const isProfile = spec.style.startsWith("profile");
  const zoom = spec.zoom ?? defaultZoom(spec.style);

  if (isProfile) {
    const data: ProfileData[] = spec.inputs.map((p, i) =>
      readProfile(p, spec.labels?.[i])
    );
    const sorted = sortByModeCount(data);
    const curves = sorted.map((d) => ({ xs: d.x, ys: d.e2, label: d.label }));
    const window: [number, number] = zoom ?? [0, 1];
    const title =
      spec.style === "profile"
        ? "Field energy density"
        : "Field energy density near the front";
    return buildCurvesSvg(
      curves,
      window,
      "x (units of L)",
      "E^2 (arb. units)",
      title,
      null
    );
  }

  const data: SeriesData[] = spec.inputs.map((p, i) =>
    readSeries(p, spec.labels?.[i])
  );
  const sorted = sortByModeCount(data);
  const curves = sorted.map((d) => ({ xs: d.t, ys: d.p3, label: d.label }));
  const window: [number, number] =
    zoom ?? [Math.min(...sorted.map((d) => d.t[0])),
             Math.max(...sorted.map((d) => d.t[d.t.length - 1]))];
  const title =
    spec.style === "excitation"
      ? "Excitation probability of atom 3"
      : "Atom 3 excitation near the causality time";
  return buildCurvesSvg(
    curves,
    window,
    "t (cavity crossings)",
    "p3",
    title,
    CAUSALITY_TIME
  );
}

/** Build and write; the output file is only touched on success. */
export function render(spec: PlotSpec): string {
  const svg = buildSvg(spec);
  fs.mkdirSync(path.dirname(path.resolve(spec.out)), { recursive: true });
  fs.writeFileSync(spec.out, svg, "ascii");
  return spec.out;
}
