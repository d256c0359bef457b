/** Reader for the plain-text quasi-probability grids: two comment header
 * lines (axis ranges / grid size, then time + ring statistic), followed by
 * n_points rows of n_points values. */

export interface QGrid {
  reMin: number;
  reMax: number;
  imMin: number;
  imMax: number;
  nPoints: number;
  time: number;
  ringStatistic: number;
  values: number[][];
}

export function parseQGrid(text: string): QGrid {
  const meta: Record<string, number> = {};
  const values: number[][] = [];
  for (const line of text.split("\n")) {
    if (line.startsWith("#")) {
      for (const tok of line.slice(1).trim().split(/\s+/)) {
        const [k, v] = tok.split("=");
        meta[k] = Number(v);
      }
    } else if (line.trim().length > 0) {
      values.push(line.trim().split(/\s+/).map(Number));
    }
  }
  for (const key of ["re_min", "re_max", "im_min", "im_max", "n_points", "time", "ring_statistic"]) {
    if (!(key in meta) || !Number.isFinite(meta[key])) {
      throw new Error(`grid header missing ${key}`);
    }
  }
  const n = meta.n_points;
  if (values.length !== n || values.some((row) => row.length !== n)) {
    throw new Error(`grid body is not ${n}x${n}`);
  }
  return {
    reMin: meta.re_min,
    reMax: meta.re_max,
    imMin: meta.im_min,
    imMax: meta.im_max,
    nPoints: n,
    time: meta.time,
    ringStatistic: meta.ring_statistic,
    values,
  };
}
