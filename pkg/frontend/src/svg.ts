import { FigureData, Series } from "./figures";

/** Minimal deterministic SVG line-chart renderer: axes, ticks, error bars,
 * legend. No DOM, no fonts to measure; same input gives identical bytes. */

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 72, right: 24, top: 44, bottom: 56 };
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    throw new Error("no finite data to plot");
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function ticks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const candidates = [step, 2 * step, 2.5 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const first = Math.ceil(lo / chosen) * chosen;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12; v += chosen) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1000 || abs < 0.01) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderSvg(data: FigureData): string {
  const allX = data.series.flatMap((s) => s.x);
  const allY = data.series.flatMap((s, i) =>
    s.yerr ? s.y.flatMap((y, k) => [y - s.yerr![k], y + s.yerr![k]]) : s.y
  );
  const [x0, x1] = extent(allX);
  const [y0raw, y1raw] = extent(allY);
  const pad = 0.06 * (y1raw - y0raw);
  const [y0, y1] = [y0raw - pad, y1raw + pad];

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => MARGIN.left + ((x - x0) / (x1 - x0)) * plotW;
  const py = (y: number) => MARGIN.top + plotH - ((y - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
      `${esc(data.title)}</text>`
  );

  // axes and grid
  const axis = `stroke="#333" stroke-width="1"`;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" ` +
      `y2="${MARGIN.top + plotH}" ${axis}/>`
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + plotH}" ${axis}/>`
  );
  for (const t of ticks(x0, x1)) {
    const x = px(t);
    parts.push(`<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#ddd"/>`);
    parts.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" ` +
        `font-size="11">${fmt(t)}</text>`
    );
  }
  for (const t of ticks(y0, y1)) {
    const y = py(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#ddd"/>`);
    parts.push(
      `<text x="${MARGIN.left - 6}" y="${y + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" ` +
      `font-size="13">${esc(data.xLabel)}</text>`
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${esc(data.yLabel)}</text>`
  );

  // series
  data.series.forEach((s: Series, i: number) => {
    const color = COLORS[i % COLORS.length];
    const pts = s.x.map((x, k) => `${px(x).toFixed(2)},${py(s.y[k]).toFixed(2)}`);
    parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="1.8" points="${pts.join(" ")}"/>`
    );
    s.x.forEach((x, k) => {
      parts.push(
        `<circle cx="${px(x).toFixed(2)}" cy="${py(s.y[k]).toFixed(2)}" r="2.6" fill="${color}"/>`
      );
      if (s.yerr && s.yerr[k] > 0) {
        const cx = px(x).toFixed(2);
        const top = py(s.y[k] + s.yerr[k]).toFixed(2);
        const bot = py(s.y[k] - s.yerr[k]).toFixed(2);
        parts.push(`<line x1="${cx}" y1="${top}" x2="${cx}" y2="${bot}" stroke="${color}" stroke-width="1"/>`);
        parts.push(`<line x1="${px(x) - 4}" y1="${top}" x2="${px(x) + 4}" y2="${top}" stroke="${color}" stroke-width="1"/>`);
        parts.push(`<line x1="${px(x) - 4}" y1="${bot}" x2="${px(x) + 4}" y2="${bot}" stroke="${color}" stroke-width="1"/>`);
      }
    });
    const ly = MARGIN.top + 14 + 16 * i;
    parts.push(
      `<line x1="${MARGIN.left + 10}" y1="${ly - 4}" x2="${MARGIN.left + 34}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="2"/>`
    );
    parts.push(
      `<text x="${MARGIN.left + 40}" y="${ly}" font-size="11">${esc(s.label)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
