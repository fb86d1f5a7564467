import { SweepRow } from "./csv";

export type FigureKind =
  | "ee_vs_power"
  | "gain_percent"
  | "cluster_vs_exhaustive"
  | "ee_vs_users"
  | "pattern_illustration";

export const FIGURE_KINDS: FigureKind[] = [
  "ee_vs_power",
  "gain_percent",
  "cluster_vs_exhaustive",
  "ee_vs_users",
  "pattern_illustration",
];

export interface Series {
  label: string;
  x: number[];
  y: number[];
  yerr?: number[];
}

export interface FigureData {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

export interface PatternOptions {
  theta3dbDeg?: number;
  sllElDb?: number;
  userAnglesDeg?: number[];
}

const MODE_LABELS: Record<string, string> = {
  "3d_cluster": "3D beamforming (clustered tilt search)",
  "3d_exhaustive": "3D beamforming (exhaustive tilt search)",
  "2d_baseline": "2D beamforming baseline",
};

function byMode(rows: SweepRow[]): Map<string, SweepRow[]> {
  const out = new Map<string, SweepRow[]>();
  for (const row of rows) {
    const list = out.get(row.mode) ?? [];
    list.push(row);
    out.set(row.mode, list);
  }
  for (const list of out.values()) {
    list.sort((a, b) => a.p_max_dbm - b.p_max_dbm);
  }
  return out;
}

function seriesOver(rows: SweepRow[], xOf: (r: SweepRow) => number): Series[] {
  const groups = byMode(rows);
  const series: Series[] = [];
  for (const [mode, list] of groups) {
    const sorted = [...list].sort((a, b) => xOf(a) - xOf(b));
    series.push({
      label: MODE_LABELS[mode] ?? mode,
      x: sorted.map(xOf),
      y: sorted.map((r) => r.mean_ee),
      yerr: sorted.map((r) => r.stderr_ee),
    });
  }
  return series;
}

function requireModes(rows: SweepRow[], modes: string[], kind: string): void {
  const present = new Set(rows.map((r) => r.mode));
  for (const mode of modes) {
    if (!present.has(mode)) {
      throw new Error(`figure ${kind} needs rows for mode ${mode}`);
    }
  }
}

export function eeVsPower(rows: SweepRow[]): FigureData {
  return {
    title: "Energy efficiency vs transmit power budget",
    xLabel: "maximum transmit power (dBm)",
    yLabel: "energy efficiency (nats/J)",
    series: seriesOver(rows, (r) => r.p_max_dbm),
  };
}

/** Percentage efficiency gain of the tilt-adaptive mode over the baseline. */
export function gainPercentSeries(rows: SweepRow[]): Series {
  requireModes(rows, ["3d_cluster", "2d_baseline"], "gain_percent");
  const groups = byMode(rows);
  const hi = groups.get("3d_cluster")!;
  const lo = new Map(groups.get("2d_baseline")!.map((r) => [r.p_max_dbm, r]));
  const x: number[] = [];
  const y: number[] = [];
  for (const row of hi) {
    const base = lo.get(row.p_max_dbm);
    if (base) {
      x.push(row.p_max_dbm);
      y.push((100 * (row.mean_ee - base.mean_ee)) / base.mean_ee);
    }
  }
  return { label: "3D gain over 2D", x, y };
}

export function gainPercent(rows: SweepRow[]): FigureData {
  return {
    title: "Gain of 3D beamforming over 2D beamforming",
    xLabel: "maximum transmit power (dBm)",
    yLabel: "efficiency gain (%)",
    series: [gainPercentSeries(rows)],
  };
}

export function clusterVsExhaustive(rows: SweepRow[]): FigureData {
  requireModes(rows, ["3d_cluster", "3d_exhaustive"], "cluster_vs_exhaustive");
  const wanted = rows.filter(
    (r) => r.mode === "3d_cluster" || r.mode === "3d_exhaustive"
  );
  return {
    title: "Clustered tilt search vs exhaustive search",
    xLabel: "maximum transmit power (dBm)",
    yLabel: "energy efficiency (nats/J)",
    series: seriesOver(wanted, (r) => r.p_max_dbm),
  };
}

export function eeVsUsers(rows: SweepRow[]): FigureData {
  return {
    title: "Energy efficiency vs users per cell",
    xLabel: "users per cell",
    yLabel: "energy efficiency (nats/J)",
    series: seriesOver(rows, (r) => r.K),
  };
}

/** Normalized linear vertical gain of the antenna main lobe around two
 * user angles, with the concavity interval marked per user. */
export function patternIllustration(opts: PatternOptions = {}): FigureData {
  const theta3db = opts.theta3dbDeg ?? 6.0;
  const sll = opts.sllElDb ?? 20.0;
  const users = opts.userAnglesDeg ?? [8.0, 16.0];
  const halfwidth = theta3db / Math.sqrt(2.4 * Math.log(10));
  const tilts: number[] = [];
  for (let t = 0; t <= 30; t += 0.05) {
    tilts.push(Number(t.toFixed(2)));
  }
  const series: Series[] = users.map((angle) => ({
    label: `user at ${angle} deg`,
    x: tilts,
    y: tilts.map((t) => {
      const lossDb = Math.min(12 * ((t - angle) / theta3db) ** 2, sll);
      return 10 ** (-lossDb / 10);
    }),
  }));
  for (const angle of users) {
    series.push({
      label: `concavity interval (${angle} deg)`,
      x: [angle - halfwidth, angle + halfwidth],
      y: [1.05, 1.05],
    });
  }
  return {
    title: "Vertical main lobe and clustering intervals",
    xLabel: "tilt angle (deg)",
    yLabel: "normalized linear gain",
    series,
  };
}

export function figureData(
  kind: FigureKind,
  rows: SweepRow[],
  opts: PatternOptions = {}
): FigureData {
  switch (kind) {
    case "ee_vs_power":
      return eeVsPower(rows);
    case "gain_percent":
      return gainPercent(rows);
    case "cluster_vs_exhaustive":
      return clusterVsExhaustive(rows);
    case "ee_vs_users":
      return eeVsUsers(rows);
    case "pattern_illustration":
      return patternIllustration(opts);
    default: {
      const never: never = kind;
      throw new Error(`unknown figure kind ${never}`);
    }
  }
}
