export { CsvSchemaError, EXPECTED_HEADER, parseSweepCsv, readSweepCsv } from "./csv";
export type { SweepRow } from "./csv";
export {
  FIGURE_KINDS,
  clusterVsExhaustive,
  eeVsPower,
  eeVsUsers,
  figureData,
  gainPercent,
  gainPercentSeries,
  patternIllustration,
} from "./figures";
export type { FigureData, FigureKind, PatternOptions, Series } from "./figures";
export { renderSvg } from "./svg";
export { render, run as runCli } from "./cli";
export type { FigureSpec } from "./cli";
