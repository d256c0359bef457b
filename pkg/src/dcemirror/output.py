"""Bundle writers: per-method CSV files, quasi-probability grids as plain
text matrices, and a JSON manifest tying a run to its exact inputs.

Every number is written with shortest round-trip formatting and no
timestamps appear anywhere, so re-running a scenario with the same manifest
reproduces the files byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .bo import BORecord
from .lindblad import ObservableRecord
from .qfunc import QGrid
from .scenarios import CaseSpec, Scenario
from .semiclassical import MeanFieldState
from .twa import EnsembleMoments

MASTER_COLUMNS = [
    "time", "mean_b_re", "mean_b_im", "abs_b", "n_a", "n_b", "var_b",
    "q_re", "q_im", "trace_err", "herm_err", "min_eig", "tail_cavity", "tail_mirror",
]
SEMICLASSICAL_COLUMNS = [
    "time", "b_re", "b_im", "abs_b", "n_a", "q_re", "q_im", "abs_b_sq", "physical",
]
BO_COLUMNS = [
    "time", "b_re", "b_im", "abs_b", "n_a_ss", "abs_b_sq",
    "gamma_b_re", "gamma_b_im", "bo_valid",
]
TWA_COLUMNS = [
    "time", "mean_b_re", "mean_b_im", "abs_b", "n_a", "n_b", "var_b",
    "mean_a2_re", "mean_a2_im", "n_traj",
    "stderr_b", "stderr_n_a", "stderr_n_b", "stderr_var_b", "pathological",
]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def csv_name(scenario: str, case: str, method: str) -> str:
    return f"{scenario}__{case}__{method}.csv"


def write_master_csv(path: Path, records: list[ObservableRecord]) -> None:
    rows = [
        [r.time, r.mean_b.real, r.mean_b.imag, abs(r.mean_b), r.n_a, r.n_b, r.var_b,
         r.q.real, r.q.imag, r.trace_err, r.herm_err,
         r.min_eig if r.min_eig is not None else 0.0, r.tail_cavity, r.tail_mirror]
        for r in records
    ]
    _write_csv(path, MASTER_COLUMNS, rows)


def write_semiclassical_csv(path: Path, states: list[MeanFieldState]) -> None:
    rows = [
        [s.time, s.b.real, s.b.imag, abs(s.b), s.n_a, s.q.real, s.q.imag,
         abs(s.b) ** 2, s.physical]
        for s in states
    ]
    _write_csv(path, SEMICLASSICAL_COLUMNS, rows)


def write_bo_csv(path: Path, records: list[BORecord]) -> None:
    rows = [
        [r.time, r.b.real, r.b.imag, abs(r.b), r.n_a_ss, abs(r.b) ** 2,
         r.gamma_b.real, r.gamma_b.imag, r.bo_valid]
        for r in records
    ]
    _write_csv(path, BO_COLUMNS, rows)


def write_twa_csv(path: Path, records: list[EnsembleMoments]) -> None:
    rows = [
        [r.time, r.mean_b.real, r.mean_b.imag, abs(r.mean_b), r.n_a, r.n_b, r.var_b,
         r.mean_a2.real, r.mean_a2.imag, r.n_traj,
         r.stderr_b, r.stderr_n_a, r.stderr_n_b, r.stderr_var_b,
         r.n_a < 0 or r.n_b < 0]
        for r in records
    ]
    _write_csv(path, TWA_COLUMNS, rows)


def q_grid_name(scenario: str, case: str, index: int) -> str:
    return f"{scenario}__{case}__q{index}.txt"


def write_q_grid(path: Path, q: np.ndarray, grid: QGrid, time: float,
                 ring: float, normalized: bool) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# re_min={_fmt(grid.re_min)} re_max={_fmt(grid.re_max)} "
            f"im_min={_fmt(grid.im_min)} im_max={_fmt(grid.im_max)} "
            f"n_points={grid.n_points}\n"
        )
        fh.write(
            f"# time={_fmt(time)} normalized={'1' if normalized else '0'} "
            f"ring_statistic={_fmt(ring)}\n"
        )
        for row in q:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_q_grid(path: Path) -> tuple[np.ndarray, dict]:
    meta: dict = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, v = tok.split("=")
                    meta[k] = float(v)
            elif line.strip():
                rows.append([float(x) for x in line.split()])
    return np.array(rows), meta


def write_qstats_csv(path: Path, entries: list[tuple[int, float, float]]) -> None:
    _write_csv(path, ["snapshot", "time", "ring_statistic"],
               [[i, t, r] for i, t, r in entries])


def _case_manifest(case: CaseSpec) -> dict:
    d = {
        "label": case.label,
        "delta": case.delta,
        "omega_c": case.omega_c,
        "gamma_b_eff": case.gamma_b_eff(),
        "b0_re": case.b0.real,
        "b0_im": case.b0.imag,
        "t_final": case.t_final,
        "sample_count": case.sample_count,
        "cutoff_cavity": case.cutoff_cavity,
        "cutoff_mirror": case.cutoff_mirror,
        "atol": case.atol,
        "rtol": case.rtol,
        "duration_note": case.duration_note,
    }
    if case.tail_bound is not None:
        d["tail_bound_override"] = case.tail_bound
    if case.twa is not None:
        d["twa"] = {"n_traj": case.twa.n_traj, "dt": case.twa.dt, "mode": case.twa.mode}
    if case.q_schedule is not None:
        d["q_function"] = {
            "times": list(case.q_schedule.times),
            "extent": case.q_schedule.extent,
            "n_points": case.q_schedule.n_points,
        }
    return d


def file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(
    out_dir: Path,
    scenario: Scenario,
    seed: int,
    backend: str,
    config_source: str,
    files: list[Path],
    q_normalized: bool,
    monitor_violations: list[str],
) -> Path:
    manifest = {
        "package": "dcemirror",
        "version": __version__,
        "scenario": {
            "name": scenario.name,
            "description": scenario.description,
            "methods": list(scenario.methods),
            "cases": [_case_manifest(c) for c in scenario.cases],
        },
        "seed": seed,
        "backend": backend,
        "config_source": config_source,
        "time_unit": "1/gamma_a (gamma_a = 1 internally)",
        "q_normalized": q_normalized,
        "monitor_violations": monitor_violations,
        "files": {p.name: file_sha256(p) for p in sorted(files)},
    }
    path = out_dir / f"{scenario.name}__manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
