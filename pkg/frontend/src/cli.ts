#!/usr/bin/env node
/** render --bundle <dir> --figure <fig2|fig3|fig4|fig5> --out <dir> */

import * as fs from "node:fs";
import * as path from "node:path";
import { pathToFileURL } from "node:url";

import { loadBundle } from "./bundle.js";
import { FigureId, figureForScenario, renderFigure } from "./figures.js";

function usage(): never {
  process.stderr.write(
    "usage: figure-kit render --bundle <dir> --figure <fig2|fig3|fig4|fig5> --out <dir>\n",
  );
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv[0] !== "render") usage();
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || argv[i + 1] === undefined) usage();
    opts.set(argv[i].slice(2), argv[i + 1]);
  }
  const bundleDir = opts.get("bundle");
  const figure = opts.get("figure") as FigureId | undefined;
  const outDir = opts.get("out");
  if (!bundleDir || !figure || !outDir) usage();
  if (!["fig2", "fig3", "fig4", "fig5"].includes(figure)) usage();

  const bundles = loadBundle(bundleDir).filter(
    (b) => figureForScenario(b.manifest.scenario.name) === figure,
  );
  if (bundles.length === 0) {
    throw new Error(`no ${figure} scenario found in ${bundleDir}`);
  }
  fs.mkdirSync(outDir, { recursive: true });
  for (const bundle of bundles) {
    const svg = renderFigure(figure, bundle);
    const file = path.join(outDir, `${bundle.manifest.scenario.name}.svg`);
    fs.writeFileSync(file, svg);
    process.stdout.write(`wrote ${file}\n`);
  }
  return 0;
}

const isMain =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(path.resolve(process.argv[1])).href;
if (isMain) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : err}\n`);
    process.exit(1);
  }
}
