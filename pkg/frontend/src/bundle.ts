/** Bundle loading: a directory produced by the simulation CLI, holding one
 * manifest per scenario plus per-case, per-method CSV files and optional
 * quasi-probability grids. */

import * as fs from "node:fs";
import * as path from "node:path";

import { parseCsv, Table } from "./csv.js";
import { parseQGrid, QGrid } from "./qgrid.js";

export interface CaseInfo {
  label: string;
  delta: number;
  omega_c: number;
  gamma_b_eff: number;
  b0_re: number;
  b0_im: number;
  t_final: number;
  [key: string]: unknown;
}

export interface Manifest {
  scenario: {
    name: string;
    description: string;
    methods: string[];
    cases: CaseInfo[];
  };
  seed: number;
  backend: string;
  files: Record<string, string>;
}

export interface CaseData {
  info: CaseInfo;
  tables: Map<string, Table>; // method -> table
  qGrids: QGrid[];
  qStats?: Table;
}

export interface Bundle {
  dir: string;
  manifest: Manifest;
  cases: CaseData[];
}

export function loadBundle(dir: string, scenarioName?: string): Bundle[] {
  if (!fs.existsSync(dir)) {
    throw new Error(`bundle directory ${dir} does not exist`);
  }
  const manifests = fs
    .readdirSync(dir)
    .filter((f) => f.endsWith("__manifest.json"))
    .sort();
  if (manifests.length === 0) {
    throw new Error(`no manifest in ${dir}: not a bundle directory`);
  }
  const bundles: Bundle[] = [];
  for (const mf of manifests) {
    const manifest = JSON.parse(fs.readFileSync(path.join(dir, mf), "utf-8")) as Manifest;
    const name = manifest.scenario.name;
    if (scenarioName !== undefined && name !== scenarioName) {
      continue;
    }
    const cases: CaseData[] = [];
    for (const info of manifest.scenario.cases) {
      const tables = new Map<string, Table>();
      for (const method of manifest.scenario.methods) {
        const file = path.join(dir, `${name}__${info.label}__${method}.csv`);
        if (!fs.existsSync(file)) {
          throw new Error(`missing ${path.basename(file)} listed by the manifest`);
        }
        tables.set(method, parseCsv(fs.readFileSync(file, "utf-8")));
      }
      const qGrids: QGrid[] = [];
      for (let i = 0; ; i++) {
        const qf = path.join(dir, `${name}__${info.label}__q${i}.txt`);
        if (!fs.existsSync(qf)) break;
        qGrids.push(parseQGrid(fs.readFileSync(qf, "utf-8")));
      }
      let qStats: Table | undefined;
      const qs = path.join(dir, `${name}__${info.label}__qstats.csv`);
      if (fs.existsSync(qs)) {
        qStats = parseCsv(fs.readFileSync(qs, "utf-8"));
      }
      cases.push({ info, tables, qGrids, qStats });
    }
    bundles.push({ dir, manifest, cases });
  }
  if (bundles.length === 0) {
    throw new Error(`no scenario ${scenarioName} in ${dir}`);
  }
  return bundles;
}
