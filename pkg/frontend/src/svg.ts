/** Minimal hand-rolled SVG line-figure builder (no DOM required). */

export interface Curve {
  values: number[];
  color: string;
  opacity: number;
  width: number;
}

export interface Figure {
  curves: Curve[];
  title: string;
  xlabel: string;
  ylabel: string;
  /** Fixed y-range; inferred from the data when omitted. */
  yRange?: [number, number];
}

const W = 760;
const H = 480;
const MARGIN = { left: 64, right: 16, top: 36, bottom: 48 };

function niceTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const rawStep = span / count;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count)!;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12; v += step) {
    ticks.push(Math.abs(v) < step / 1e6 ? 0 : v);
  }
  return ticks;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderSvg(fig: Figure): string {
  const maxLen = Math.max(1, ...fig.curves.map((c) => c.values.length));
  let lo = Infinity;
  let hi = -Infinity;
  for (const c of fig.curves) {
    for (const v of c.values) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (fig.yRange) {
    [lo, hi] = fig.yRange;
  } else if (!Number.isFinite(lo)) {
    [lo, hi] = [0, 1];
  } else if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const x = (i: number) => MARGIN.left + (i / Math.max(1, maxLen - 1)) * plotW;
  const y = (v: number) => MARGIN.top + (1 - (v - lo) / (hi - lo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
  );

  for (const t of niceTicks(lo, hi)) {
    const py = y(t).toFixed(2);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${W - MARGIN.right}" y2="${py}" stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${py}" font-size="12" text-anchor="end" dominant-baseline="middle">${+t.toPrecision(10)}</text>`,
    );
  }
  for (const t of niceTicks(0, maxLen - 1)) {
    const px = x(t).toFixed(2);
    parts.push(
      `<text x="${px}" y="${H - MARGIN.bottom + 18}" font-size="12" text-anchor="middle">${+t.toPrecision(10)}</text>`,
    );
  }

  for (const c of fig.curves) {
    const pts = c.values
      .map((v, i) => `${x(i).toFixed(2)},${y(Math.min(hi, Math.max(lo, v))).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline fill="none" stroke="${c.color}" stroke-opacity="${c.opacity}" stroke-width="${c.width}" points="${pts}"/>`,
    );
  }

  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`,
    `<text x="${W / 2}" y="22" font-size="15" text-anchor="middle">${esc(fig.title)}</text>`,
    `<text x="${W / 2}" y="${H - 10}" font-size="13" text-anchor="middle">${esc(fig.xlabel)}</text>`,
    `<text x="16" y="${H / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 ${H / 2})">${esc(fig.ylabel)}</text>`,
    `</svg>`,
  );
  return parts.join("\n") + "\n";
}
