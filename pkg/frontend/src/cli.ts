import { writeFileSync } from "fs";
import { CsvSchemaError, readSweepCsv } from "./csv";
import { FIGURE_KINDS, FigureKind, PatternOptions, figureData } from "./figures";
import { renderSvg } from "./svg";

const USAGE = `usage: plots <kind> --in results.csv --out figure.svg [--format svg]
  kinds: ${FIGURE_KINDS.join(", ")}
  pattern_illustration options: --theta3db <deg> --sll-el <dB> --users a,b`;

/** Everything one figure invocation needs. */
export interface FigureSpec {
  kind: FigureKind;
  inputCsv: string;
  output: string;
  format: "svg";
  pattern?: PatternOptions;
}

/** Produce one image file from a sweep CSV. */
export function render(spec: FigureSpec): void {
  const rows = readSweepCsv(spec.inputCsv);
  const data = figureData(spec.kind, rows, spec.pattern ?? {});
  writeFileSync(spec.output, renderSvg(data));
}

export function parseArgs(argv: string[]): FigureSpec {
  const [kind, ...rest] = argv;
  if (!kind || !FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new Error(`unknown figure kind ${kind ?? "(none)"}\n${USAGE}`);
  }
  const flags = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    if (!rest[i].startsWith("--") || rest[i + 1] === undefined) {
      throw new Error(`bad argument ${rest[i]}\n${USAGE}`);
    }
    flags.set(rest[i].slice(2), rest[i + 1]);
  }
  const inputCsv = flags.get("in");
  const output = flags.get("out");
  if (!inputCsv || !output) {
    throw new Error(`--in and --out are required\n${USAGE}`);
  }
  const format = flags.get("format") ?? "svg";
  if (format !== "svg") {
    throw new Error(`unsupported image format ${format}; only svg is produced`);
  }
  const pattern: PatternOptions = {};
  if (flags.has("theta3db")) pattern.theta3dbDeg = Number(flags.get("theta3db"));
  if (flags.has("sll-el")) pattern.sllElDb = Number(flags.get("sll-el"));
  if (flags.has("users")) {
    pattern.userAnglesDeg = flags.get("users")!.split(",").map(Number);
  }
  return { kind: kind as FigureKind, inputCsv, output, format: "svg", pattern };
}

export function run(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    render(spec);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    if (err instanceof CsvSchemaError) {
      console.error(`invalid input CSV: ${err.message}`);
    } else {
      console.error((err as Error).message);
    }
    return 1;
  }
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
