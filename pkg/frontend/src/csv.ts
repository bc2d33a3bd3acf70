/**
 * Readers for the simulator's CSV outputs.
 *
 * Two schemas are understood, matched by exact header:
 *   series:  t,p1,p2,p3,norm2,energy
 *   profile: x,e2
 * Lines starting with '#' are trailers (e.g. "# truncated") and are skipped;
 * a file whose body holds no data rows is a schema error, not an empty plot.
 */

import * as fs from "fs";
import * as path from "path";

export class SchemaError extends Error {}

export const PROFILE_HEADER = ["x", "e2"];
export const SERIES_HEADER = ["t", "p1", "p2", "p3", "norm2", "energy"];

export interface ProfileData {
  kind: "profile";
  x: number[];
  e2: number[];
  sourcePath: string;
  label: string;
  modeCount: number | null;
}

export interface SeriesData {
  kind: "series";
  t: number[];
  p1: number[];
  p2: number[];
  p3: number[];
  norm2: number[];
  energy: number[];
  sourcePath: string;
  label: string;
  modeCount: number | null;
}

/** Parse rows after validating the header exactly; '#'-lines are trailers. */
export function parseCsv(
  text: string,
  expectedHeader: string[],
  sourcePath: string
): number[][] {
  const lines = text.split(/\r?\n/);
  if (lines.length === 0 || lines[0].trim() === "") {
    throw new SchemaError(`${sourcePath}: missing header`);
  }
  const header = lines[0].split(",").map((c) => c.trim());
  if (
    header.length !== expectedHeader.length ||
    header.some((c, i) => c !== expectedHeader[i])
  ) {
    throw new SchemaError(
      `${sourcePath}: header '${lines[0]}' does not match expected ` +
        `'${expectedHeader.join(",")}'`
    );
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (line.trim() === "" || line.startsWith("#")) continue;
    const cells = line.split(",");
    if (cells.length !== expectedHeader.length) {
      throw new SchemaError(
        `${sourcePath}:${i + 1}: expected ${expectedHeader.length} cells, ` +
          `got ${cells.length}`
      );
    }
    const row = cells.map((c) => {
      const v = Number(c);
      if (Number.isNaN(v) && c.trim() !== "nan") {
        throw new SchemaError(`${sourcePath}:${i + 1}: bad number '${c}'`);
      }
      return v;
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError(`${sourcePath}: empty CSV body`);
  }
  return rows;
}

/** "fig2_symmetric2001_profile_t0.25.csv" -> 2001; null when unparseable. */
export function modeCountFromName(sourcePath: string): number | null {
  const base = path.basename(sourcePath);
  const m = base.match(/(?:symmetric|asymmetric)(\d+)/);
  return m ? parseInt(m[1], 10) : null;
}

export function defaultLabel(sourcePath: string): string {
  const count = modeCountFromName(sourcePath);
  if (count !== null) return `${count} modes`;
  return path.basename(sourcePath).replace(/\.csv$/, "");
}

export function readProfile(sourcePath: string, label?: string): ProfileData {
  const rows = parseCsv(
    fs.readFileSync(sourcePath, "ascii"),
    PROFILE_HEADER,
    sourcePath
  );
  return {
    kind: "profile",
    x: rows.map((r) => r[0]),
    e2: rows.map((r) => r[1]),
    sourcePath,
    label: label ?? defaultLabel(sourcePath),
    modeCount: modeCountFromName(sourcePath),
  };
}

export function readSeries(sourcePath: string, label?: string): SeriesData {
  const rows = parseCsv(
    fs.readFileSync(sourcePath, "ascii"),
    SERIES_HEADER,
    sourcePath
  );
  return {
    kind: "series",
    t: rows.map((r) => r[0]),
    p1: rows.map((r) => r[1]),
    p2: rows.map((r) => r[2]),
    p3: rows.map((r) => r[3]),
    norm2: rows.map((r) => r[4]),
    energy: rows.map((r) => r[5]),
    sourcePath,
    label: label ?? defaultLabel(sourcePath),
    modeCount: modeCountFromName(sourcePath),
  };
}
