export { loadBundle } from "./bundle.js";
export type { Bundle, CaseData, Manifest } from "./bundle.js";
export { parseCsv, column, hasColumn } from "./csv.js";
export type { Table } from "./csv.js";
export { parseQGrid } from "./qgrid.js";
export type { QGrid } from "./qgrid.js";
export { renderFigure, figureForScenario } from "./figures.js";
export type { FigureId } from "./figures.js";
