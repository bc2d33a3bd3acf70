import { describe, expect, it } from "vitest";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import {
  CAUSALITY_TIME,
  buildSvg,
  defaultZoom,
  lineStyles,
  render,
} from "../src/render";
import { SchemaError } from "../src/csv";
import { parseArgs } from "../src/cli";

const FIXTURES = path.join(__dirname, "fixtures");
const PROFILE_21 = path.join(FIXTURES, "custom_symmetric21_profile_t0.25.csv");
const PROFILE_41 = path.join(FIXTURES, "custom_symmetric41_profile_t0.25.csv");
const SERIES_21 = path.join(FIXTURES, "custom_symmetric21_series.csv");
const SERIES_41 = path.join(FIXTURES, "custom_symmetric41_series.csv");

function tmpOut(name: string): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
  return path.join(dir, name);
}

describe("lineStyles", () => {
  it("keeps a lone curve continuous", () => {
    expect(lineStyles(1)).toEqual([""]);
  });

  it("dashes the first curve of an overlay, keeps the last continuous", () => {
    const two = lineStyles(2);
    expect(two[0]).not.toBe("");
    expect(two[1]).toBe("");
    const three = lineStyles(3);
    expect(three[0]).not.toBe("");
    expect(three[1]).not.toBe("");
    expect(three[1]).not.toBe(three[0]);
    expect(three[2]).toBe("");
  });
});

describe("defaultZoom", () => {
  it("frames the front for profile overlays", () => {
    expect(defaultZoom("profile-zoom-overlay")).toEqual([0.45, 0.55]);
  });

  it("frames the causality time for excitation overlays", () => {
    const w = defaultZoom("excitation-zoom-overlay")!;
    expect(w[0]).toBeLessThan(CAUSALITY_TIME);
    expect(w[1]).toBeGreaterThan(CAUSALITY_TIME);
  });

  it("leaves plain styles unwindowed", () => {
    expect(defaultZoom("profile")).toBeNull();
    expect(defaultZoom("excitation")).toBeNull();
  });
});

describe("buildSvg", () => {
  it("renders a single profile", () => {
    const svg = buildSvg({ style: "profile", inputs: [PROFILE_41], out: "x.svg" });
    expect(svg).toContain("<svg");
    expect(svg).toContain("x (units of L)");
    expect(svg).toContain("E^2 (arb. units)");
    expect(svg).not.toContain("stroke-dasharray=\"9 6\"");
  });

  it("orders overlay curves by mode count, fewest dashed", () => {
    // pass the larger run first; sorting must still dash the 21-mode curve
    const svg = buildSvg({
      style: "profile-zoom-overlay",
      inputs: [PROFILE_41, PROFILE_21],
      out: "x.svg",
    });
    const dashedAt = svg.indexOf('stroke-dasharray="9 6"');
    expect(dashedAt).toBeGreaterThan(-1);
    const legend21 = svg.indexOf("21 modes");
    const legend41 = svg.indexOf("41 modes");
    expect(legend21).toBeGreaterThan(-1);
    expect(legend41).toBeGreaterThan(legend21);
  });

  it("marks the causality time on excitation styles", () => {
    const svg = buildSvg({
      style: "excitation",
      inputs: [SERIES_21, SERIES_41],
      out: "x.svg",
    });
    expect(svg).toContain("t = 0.5");
    expect(svg).toContain("t (cavity crossings)");
    expect(svg).toContain(">p3<");
  });

  it("honors an explicit zoom window", () => {
    const svg = buildSvg({
      style: "excitation-zoom-overlay",
      inputs: [SERIES_41],
      zoom: [0.1, 0.2],
      out: "x.svg",
    });
    // marker at t=0.5 is outside the window, so no marker label
    expect(svg).not.toContain("t = 0.5");
  });

  it("is deterministic", () => {
    const spec = {
      style: "excitation-zoom-overlay" as const,
      inputs: [SERIES_21, SERIES_41],
      out: "x.svg",
    };
    expect(buildSvg(spec)).toBe(buildSvg(spec));
  });

  it("rejects mismatched label counts", () => {
    expect(() =>
      buildSvg({
        style: "profile",
        inputs: [PROFILE_21, PROFILE_41],
        labels: ["just one"],
        out: "x.svg",
      })
    ).toThrow(SchemaError);
  });
});

describe("render", () => {
  it("writes the SVG file", () => {
    const out = tmpOut("fig.svg");
    render({
      style: "profile-zoom-overlay",
      inputs: [PROFILE_21, PROFILE_41],
      out,
    });
    const text = fs.readFileSync(out, "ascii");
    expect(text.startsWith("<svg")).toBe(true);
    expect(text).toContain("</svg>");
  });

  it("does not write on a schema error", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
    const bad = path.join(dir, "empty.csv");
    fs.writeFileSync(bad, "x,e2\n", "ascii");
    const out = path.join(dir, "fig.svg");
    expect(() => render({ style: "profile", inputs: [bad], out })).toThrow(
      SchemaError
    );
    expect(fs.existsSync(out)).toBe(false);
  });
});

describe("parseArgs", () => {
  it("assembles a full spec", () => {
    const spec = parseArgs([
      "--style", "excitation-zoom-overlay",
      "--input", SERIES_21,
      "--input", SERIES_41,
      "--label", "coarse",
      "--label", "fine",
      "--zoom", "0.4,0.6",
      "--out", "fig.svg",
    ]);
    expect(spec.style).toBe("excitation-zoom-overlay");
    expect(spec.inputs.length).toBe(2);
    expect(spec.labels).toEqual(["coarse", "fine"]);
    expect(spec.zoom).toEqual([0.4, 0.6]);
  });

  it("rejects unknown styles and flags", () => {
    expect(() =>
      parseArgs(["--style", "pie", "--input", "a.csv", "--out", "b.svg"])
    ).toThrow(/unknown style/);
    expect(() => parseArgs(["--frobnicate"])).toThrow(/unknown argument/);
  });

  it("requires style, input, and out", () => {
    expect(() => parseArgs(["--input", "a.csv", "--out", "b.svg"])).toThrow(
      /--style is required/
    );
    expect(() => parseArgs(["--style", "profile", "--out", "b.svg"])).toThrow(
      /--input is required/
    );
    expect(() => parseArgs(["--style", "profile", "--input", "a.csv"])).toThrow(
      /--out is required/
    );
  });

  it("rejects malformed zoom windows", () => {
    expect(() =>
      parseArgs([
        "--style", "profile", "--input", "a.csv", "--out", "b.svg",
        "--zoom", "0.6,0.4",
      ])
    ).toThrow(/--zoom/);
  });
});
