/** Deterministic SVG assembly: pure string building, fixed number
 * formatting, no environment-dependent state, so the same input renders to
 * byte-identical output. */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate ${x}`);
  if (x === 0) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") || s.includes("e")
    ? s.replace(/\.?0+($|e)/, "$1")
    : s;
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const s = err >= 7.5 ? step * 10 : err >= 3.5 ? step * 5 : err >= 1.5 ? step * 2 : step;
  const start = Math.ceil(lo / s) * s;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += s) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale): string {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    pts.push(`${fmt(sx(xs[i]))},${fmt(sy(ys[i]))}`);
  }
  return pts.join(" ");
}

export function bandPath(
  xs: number[],
  lo: number[],
  hi: number[],
  sx: Scale,
  sy: Scale,
): string {
  const fwd: string[] = [];
  const back: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    fwd.push(`${fmt(sx(xs[i]))},${fmt(sy(hi[i]))}`);
    back.push(`${fmt(sx(xs[xs.length - 1 - i]))},${fmt(sy(lo[xs.length - 1 - i]))}`);
  }
  return `M${fwd.join(" L")} L${back.join(" L")} Z`;
}

// compact sequential colormap (dark violet to yellow), 9 anchor stops
const STOPS: [number, number, number][] = [
  [68, 1, 84], [71, 44, 122], [59, 81, 139], [44, 113, 142], [33, 144, 141],
  [39, 173, 129], [92, 200, 99], [170, 220, 50], [253, 231, 37],
];

export function colormap(v: number): string {
  const x = Math.min(1, Math.max(0, v)) * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(x));
  const f = x - i;
  const c = STOPS[i].map((a, k) => Math.round(a + f * (STOPS[i + 1][k] - a)));
  return `#${c.map((n) => n.toString(16).padStart(2, "0")).join("")}`;
}

export interface Panel {
  body: string[];
  x: number;
  y: number;
  w: number;
  h: number;
}

export function axisBox(
  p: Panel,
  sx: Scale,
  sy: Scale,
  xLabel: string,
  yLabel: string,
  title = "",
): void {
  const [x0, x1] = sx.range;
  const [y0, y1] = sy.range;
  p.body.push(
    `<rect x="${fmt(x0)}" y="${fmt(y1)}" width="${fmt(x1 - x0)}" height="${fmt(y0 - y1)}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  for (const t of ticks(sx.domain[0], sx.domain[1])) {
    const x = sx(t);
    p.body.push(`<line x1="${fmt(x)}" y1="${fmt(y0)}" x2="${fmt(x)}" y2="${fmt(y0 - 4)}" stroke="#333"/>`);
    p.body.push(
      `<text x="${fmt(x)}" y="${fmt(y0 + 14)}" font-size="10" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(sy.domain[0], sy.domain[1])) {
    const y = sy(t);
    p.body.push(`<line x1="${fmt(x0)}" y1="${fmt(y)}" x2="${fmt(x0 + 4)}" y2="${fmt(y)}" stroke="#333"/>`);
    p.body.push(
      `<text x="${fmt(x0 - 5)}" y="${fmt(y + 3)}" font-size="10" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  p.body.push(
    `<text x="${fmt((x0 + x1) / 2)}" y="${fmt(y0 + 30)}" font-size="11" text-anchor="middle">${xLabel}</text>`,
  );
  p.body.push(
    `<text x="${fmt(x0 - 38)}" y="${fmt((y0 + y1) / 2)}" font-size="11" text-anchor="middle" transform="rotate(-90 ${fmt(x0 - 38)} ${fmt((y0 + y1) / 2)})">${yLabel}</text>`,
  );
  if (title) {
    p.body.push(
      `<text x="${fmt((x0 + x1) / 2)}" y="${fmt(y1 - 6)}" font-size="12" text-anchor="middle" font-weight="bold">${title}</text>`,
    );
  }
}

export function document(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
