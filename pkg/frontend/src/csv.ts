import { readFileSync } from "fs";
import Papa from "papaparse";

/** One aggregated sweep row produced by the simulation harness. */
export interface SweepRow {
  p_max_dbm: number;
  mode: string;
  K: number;
  M: number;
  L: number;
  mean_ee: number;
  stderr_ee: number;
  mean_sumrate_nats: number;
  mean_power_used: number;
  mean_outer_iters: number;
  drops: number;
}

export const EXPECTED_HEADER = [
  "p_max_dbm",
  "mode",
  "K",
  "M",
  "L",
  "mean_ee",
  "stderr_ee",
  "mean_sumrate_nats",
  "mean_power_used",
  "mean_outer_iters",
  "drops",
];

export class CsvSchemaError extends Error {}

const NUMERIC = EXPECTED_HEADER.filter((c) => c !== "mode");

/** Parse harness CSV text, enforcing the exact column schema. */
export function parseSweepCsv(text: string): SweepRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  if (
    fields.length !== EXPECTED_HEADER.length ||
    !EXPECTED_HEADER.every((c, i) => fields[i] === c)
  ) {
    throw new CsvSchemaError(
      `CSV header mismatch: expected [${EXPECTED_HEADER.join(",")}], ` +
        `found [${fields.join(",")}]`
    );
  }
  if (parsed.data.length === 0) {
    throw new CsvSchemaError("CSV contains no rows");
  }
  return parsed.data.map((raw, i) => {
    const row: Record<string, number | string> = { mode: raw.mode };
    for (const col of NUMERIC) {
      const value = Number(raw[col]);
      if (!Number.isFinite(value)) {
        throw new CsvSchemaError(`row ${i + 1}: column ${col} is not numeric (${raw[col]})`);
      }
      row[col] = value;
    }
    return row as unknown as SweepRow;
  });
}

export function readSweepCsv(path: string): SweepRow[] {
  return parseSweepCsv(readFileSync(path, "utf8"));
}
