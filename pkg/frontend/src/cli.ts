/** Command line wrapper: parse flags, delegate to render, exit nonzero on error. */

import { PlotSpec, STYLES, Style, render } from "./render";
import { SchemaError } from "./csv";

const USAGE = `usage: plotscripts --style STYLE --input FILE [--input FILE ...]
                   [--label TEXT ...] [--zoom LO,HI] --out FILE.svg

styles: ${STYLES.join(", ")}

profile styles read profile CSVs (header x,e2); excitation styles read
series CSVs (header t,p1,p2,p3,norm2,energy).  With several inputs the
curves are overlaid, fewest modes dashed, most modes continuous.`;

export function parseArgs(argv: string[]): PlotSpec {
  let style: string | null = null;
  let out: string | null = null;
  let zoom: [number, number] | undefined;
  const inputs: string[] = [];
  const labels: string[] = [];

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = (): string => {
      i++;
      if (i >= argv.length) throw new SchemaError(`${arg} needs a value`);
      return argv[i];
    };
    switch (arg) {
      case "--style":
        style = next();
        break;
      case "--input":
        inputs.push(next());
        break;
      case "--label":
        labels.push(next());
        break;
      case "--out":
        out = next();
        break;
      case "--zoom": {
        const raw = next().split(",");
        if (raw.length !== 2) throw new SchemaError("--zoom expects LO,HI");
        const lo = Number(raw[0]);
        const hi = Number(raw[1]);
        if (!Number.isFinite(lo) || !Number.isFinite(hi) || lo >= hi) {
          throw new SchemaError(`bad --zoom window '${argv[i]}'`);
        }
        zoom = [lo, hi];
        break;
      }
      case "--help":
      case "-h":
        console.log(USAGE);
        process.exit(0);
        break;
      default:
        throw new SchemaError(`unknown argument '${arg}'`);
    }
  }

  if (style === null) throw new SchemaError("--style is required");
  if (!(STYLES as readonly string[]).includes(style)) {
    throw new SchemaError(
      `unknown style '${style}'; expected one of ${STYLES.join(", ")}`
    );
  }
  if (inputs.length === 0) throw new SchemaError("--input is required");
  if (out === null) throw new SchemaError("--out is required");
  if (labels.length > 0 && labels.length !== inputs.length) {
    throw new SchemaError(`${labels.length} labels for ${inputs.length} inputs`);
  }

  return {
    style: style as Style,
    inputs,
    labels: labels.length > 0 ? labels : undefined,
    zoom,
    out,
  };
}

export function main(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`argument error: ${(err as Error).message}`);
    console.error(USAGE);
    return 1;
  }
  try {
    const written = render(spec);
    console.log(`wrote ${written}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
