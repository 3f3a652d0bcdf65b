// Minimal SVG line charts as strings: a weight-vs-patient line starting
// at 0.5, and a log-scale evidence chart with the decisive threshold
// rule.  Pure functions so the chart geometry is testable without a DOM.

const W = 560;
const H = 200;
const PAD = 34;

function scaleX(t: number, budget: number): number {
  return PAD + ((t - 1) / Math.max(budget - 1, 1)) * (W - 2 * PAD);
}

function polyline(points: string, color: string): string {
  return `<polyline fill="none" stroke="${color}" stroke-width="1.5" points="${points}"/>`;
}

export function weightChart(series: { t: number; wA: number }[], budget: number): string {
  const y = (w: number) => H - PAD - w * (H - 2 * PAD);
  const pts = series.map((p) => `${scaleX(p.t, budget).toFixed(1)},${y(p.wA).toFixed(1)}`).join(" ");
  const mid = y(0.5).toFixed(1);
  return [
    `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img" aria-label="allocation weight by patient">`,
    `<line x1="${PAD}" y1="${mid}" x2="${W - PAD}" y2="${mid}" stroke="#bbb" stroke-dasharray="4 3"/>`,
    `<text x="${PAD}" y="${y(1) - 4}" class="axis">P(assign A)</text>`,
    `<text x="${PAD}" y="${Number(mid) - 4}" class="axis">0.5</text>`,
    series.length ? polyline(pts, "#0b6e99") : "",
    `</svg>`,
  ].join("");
}

export function evidenceChart(
  series: { t: number; bf01: number }[],
  budget: number,
  threshold: number,
): string {
  // log scale spanning the data and the threshold, padded a decade
  const values = series.map((p) => p.bf01).concat([threshold, 1.0]);
  const lo = Math.min(...values.map((v) => Math.log10(v))) - 0.5;
  const hi = Math.max(...values.map((v) => Math.log10(v))) + 0.5;
  const y = (bf: number) => {
    const frac = (Math.log10(bf) - lo) / (hi - lo);
    return H - PAD - frac * (H - 2 * PAD);
  };
  const pts = series.map((p) => `${scaleX(p.t, budget).toFixed(1)},${y(p.bf01).toFixed(1)}`).join(" ");
  const rule = y(threshold).toFixed(1);
  return [
    `<svg viewBox="0 0 ${W} ${H}" class="chart" role="img" aria-label="evidence ratio by patient">`,
    `<line x1="${PAD}" y1="${rule}" x2="${W - PAD}" y2="${rule}" stroke="#c0392b" stroke-dasharray="4 3"/>`,
    `<text x="${W - PAD - 120}" y="${Number(rule) - 4}" class="axis">decisive ${threshold}</text>`,
    `<text x="${PAD}" y="${y(Math.pow(10, hi - 0.5)) - 4}" class="axis">evidence ratio (log)</text>`,
    series.length ? polyline(pts, "#70308c") : "",
    `</svg>`,
  ].join("");
}
