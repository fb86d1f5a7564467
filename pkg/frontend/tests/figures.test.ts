import { join } from "path";
import { describe, expect, it } from "vitest";
import { readSweepCsv } from "../src/csv";
import {
  FIGURE_KINDS,
  clusterVsExhaustive,
  eeVsPower,
  eeVsUsers,
  figureData,
  gainPercentSeries,
  patternIllustration,
} from "../src/figures";

const FIXTURES = join(__dirname, "fixtures");
const golden = () => readSweepCsv(join(FIXTURES, "golden.csv"));

describe("figure data extraction", () => {
  it("ee_vs_power groups one series per mode, sorted by power", () => {
    const fig = eeVsPower(golden());
    expect(fig.series).toHaveLength(3);
    for (const s of fig.series) {
      expect(s.x).toEqual([30, 46]);
      expect(s.yerr).toBeDefined();
    }
    expect(fig.xLabel).toContain("dBm");
  });

  it("gain series is identically zero when both modes tie", () => {
    const rows = readSweepCsv(join(FIXTURES, "equal_modes.csv"));
    const series = gainPercentSeries(rows);
    expect(series.x).toEqual([22, 34, 46]);
    expect(series.y.every((v) => v === 0)).toBe(true);
  });

  it("gain series matches a hand computation", () => {
    const rows = golden();
    const series = gainPercentSeries(rows);
    const hi = rows.find((r) => r.mode === "3d_cluster" && r.p_max_dbm === 30)!;
    const lo = rows.find((r) => r.mode === "2d_baseline" && r.p_max_dbm === 30)!;
    expect(series.y[0]).toBeCloseTo((100 * (hi.mean_ee - lo.mean_ee)) / lo.mean_ee, 12);
  });

  it("cluster_vs_exhaustive keeps only the two search modes", () => {
    const fig = clusterVsExhaustive(golden());
    expect(fig.series).toHaveLength(2);
    expect(fig.series.map((s) => s.label).join(" ")).not.toContain("2D");
  });

  it("cluster_vs_exhaustive demands both modes", () => {
    const only2d = golden().filter((r) => r.mode === "2d_baseline");
    expect(() => clusterVsExhaustive(only2d)).toThrow(/3d_cluster/);
  });

  it("ee_vs_users puts users per cell on the x axis", () => {
    const rows = readSweepCsv(join(FIXTURES, "users.csv"));
    const fig = eeVsUsers(rows);
    for (const s of fig.series) {
      expect(s.x).toEqual([1, 2, 3]);
    }
  });

  it("pattern illustration draws one lobe and one interval per user", () => {
    const fig = patternIllustration({ userAnglesDeg: [8, 16] });
    expect(fig.series).toHaveLength(4);
    const lobe = fig.series[0];
    const peak = Math.max(...lobe.y);
    expect(peak).toBeCloseTo(1.0, 6);
    // side lobe floor: 20 dB below peak
    expect(Math.min(...lobe.y)).toBeCloseTo(0.01, 6);
    const interval = fig.series[2];
    const halfwidth = 6 / Math.sqrt(2.4 * Math.log(10));
    expect(interval.x[1] - interval.x[0]).toBeCloseTo(2 * halfwidth, 9);
  });

  it("figureData dispatches every kind", () => {
    const rows = golden();
    for (const kind of FIGURE_KINDS) {
      const fig = figureData(kind, rows);
      expect(fig.series.length).toBeGreaterThan(0);
      expect(fig.title.length).toBeGreaterThan(0);
    }
  });

  it("same rows give identical figure data", () => {
    const a = figureData("ee_vs_power", golden());
    const b = figureData("ee_vs_power", golden());
    expect(a).toEqual(b);
  });
});
