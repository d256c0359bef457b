"""Scenario execution: dispatch the requested solvers case by case, write the
bundle, and compare methods against the master-equation reference."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bo, kernels, lindblad, output, semiclassical, twa
from .fock import partial_trace_mirror
from .model import ConfigError
from .qfunc import QGrid, q_function, ring_statistic
from .scenarios import CaseSpec, Scenario

# method CSVs carrying each comparable quantity (column names per method)
_COMPARABLES = {
    "semiclassical": {"abs_b": "abs_b", "n_a": "n_a"},
    "bo": {"abs_b": "abs_b"},
    "twa": {"abs_b": "abs_b", "n_a": "n_a", "var_b": "var_b"},
}


@dataclass
class CaseResult:
    case: CaseSpec
    master: list | None = None
    semiclassical: list | None = None
    bo: list | None = None
    twa: list | None = None
    q_entries: list[tuple[int, float, float]] = field(default_factory=list)
    q_grids: list = field(default_factory=list)
    monitor_violations: list[str] = field(default_factory=list)


@dataclass
class BundleResult:
    scenario: Scenario
    out_dir: Path
    cases: list[CaseResult]
    manifest_path: Path
    monitor_violations: list[str]


class RunCache:
    """Memoizes per-case solver outputs so scenarios sharing parameter sets
    (the variance scenario reuses the amplitude scenarios' exact runs) do not
    integrate the same master equation twice in one session."""

    def __init__(self):
        self.store: dict = {}

    @staticmethod
    def _core_key(case: CaseSpec) -> tuple:
        q = None
        if case.q_schedule is not None:
            q = (case.q_schedule.times, case.q_schedule.extent, case.q_schedule.n_points)
        return (
            case.delta, case.omega_c, case.b0, case.t_final, case.sample_count,
            case.cutoff_cavity, case.cutoff_mirror, case.atol, case.rtol,
            case.tail_bound, q,
        )

    def get(self, method: str, case: CaseSpec, extra=()) -> object | None:
        return self.store.get((method, self._core_key(case), extra))

    def put(self, method: str, case: CaseSpec, value, extra=()) -> None:
        self.store[(method, self._core_key(case), extra)] = value


def run_case(
    scenario: Scenario,
    case: CaseSpec,
    methods: tuple[str, ...],
    seed: int,
    q_normalized: bool = False,
    cache: RunCache | None = None,
) -> CaseResult:
    params = case.params()
    times = case.sample_times()
    result = CaseResult(case=case)

    if "master" in methods:
        cached = cache.get("master", case, (q_normalized,)) if cache else None
        if cached is not None:
            result.master, result.q_entries, result.q_grids, viol = cached
            result.monitor_violations.extend(viol)
        else:
            result = _run_master(case, params, times, result, q_normalized)
            if cache is not None:
                cache.put("master", case,
                          (result.master, result.q_entries, result.q_grids,
                           list(result.monitor_violations)),
                          (q_normalized,))

    if "semiclassical" in methods:
        cached = cache.get("semiclassical", case) if cache else None
        if cached is not None:
            result.semiclassical = cached
        else:
            mf = semiclassical.integrate_mean_field(
                semiclassical.MeanFieldState(0.0, case.b0, 0.0, 0.0), params, times
            )
            result.semiclassical = mf.states
            if cache is not None:
                cache.put("semiclassical", case, mf.states)

    if "bo" in methods:
        cached = cache.get("bo", case) if cache else None
        if cached is not None:
            result.bo = cached
        else:
            result.bo = bo.evolve_bo(case.b0, params, times)
            if cache is not None:
                cache.put("bo", case, result.bo)

    if "twa" in methods:
        opts = case.twa
        if opts is None:
            raise ConfigError(f"case {case.label}: twa requested but no twa options set")
        extra = (opts.n_traj, opts.dt, opts.mode, seed)
        cached = cache.get("twa", case, extra) if cache else None
        if cached is not None:
            result.twa = cached
        else:
            classical = opts.mode == "classical"
            result.twa = twa.run_ensemble(
                case.b0, params, opts.n_traj, opts.dt, times, master_seed=seed,
                wigner_spread=not classical, quantum_noise=not classical,
            )
            if cache is not None:
                cache.put("twa", case, result.twa, extra)
    return result


def _run_master(case, params, times, result, q_normalized):
    snap = None
    if case.q_schedule:
        # snapshots must sit exactly on the sample grid
        snap = []
        for ts in case.q_schedule.times:
            k = int(np.argmin(np.abs(times - ts)))
            if abs(times[k] - ts) > 1e-6 * max(1.0, abs(ts)):
                raise ConfigError(
                    f"case {case.label}: snapshot time {ts} is not on the sample grid"
                )
            snap.append(times[k])
        snap = np.array(snap)
    from .model import TAIL_POPULATION_MAX

    ev = lindblad.evolve(
        lindblad.initial_state(case.b0, params),
        params,
        times,
        snapshot_times=snap,
        atol=case.atol,
        rtol=case.rtol,
        tail_bound=case.tail_bound if case.tail_bound else TAIL_POPULATION_MAX,
    )
    result.master = ev.records
    for r in ev.records:
        if r.trace_err > 1e-8:
            result.monitor_violations.append(
                f"{case.label}: trace error {r.trace_err:.2e} at t={r.time:.4g}")
        if r.herm_err > 1e-8:
            result.monitor_violations.append(
                f"{case.label}: hermiticity {r.herm_err:.2e} at t={r.time:.4g}")
        if r.min_eig is not None and r.min_eig < -1e-7:
            result.monitor_violations.append(
                f"{case.label}: negative eigenvalue {r.min_eig:.2e} at t={r.time:.4g}")
        if r.var_b < -1e-9:
            result.monitor_violations.append(
                f"{case.label}: negative amplitude variance {r.var_b:.2e} at t={r.time:.4g}")
    if case.q_schedule is not None:
        grid = QGrid(
            -case.q_schedule.extent, case.q_schedule.extent,
            -case.q_schedule.extent, case.q_schedule.extent,
            case.q_schedule.n_points,
        )
        for i, st in enumerate(ev.snapshots):
            rho_m = partial_trace_mirror(st.rho, params.cutoffs)
            q = q_function(rho_m, grid, normalized=q_normalized)
            result.q_entries.append((i, st.time, ring_statistic(q, grid)))
            result.q_grids.append((i, st.time, q, grid))
    return result


def run_scenario(
    scenario: Scenario,
    out_dir: Path,
    seed: int | None = None,
    q_normalized: bool = False,
    config_source: str = "builtin",
    cache: RunCache | None = None,
) -> BundleResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    use_seed = scenario.seed if seed is None else seed
    files: list[Path] = []
    case_results: list[CaseResult] = []
    violations: list[str] = []

    for case in scenario.cases:
        res = run_case(scenario, case, scenario.methods, use_seed, q_normalized, cache)
        case_results.append(res)
        violations.extend(res.monitor_violations)
        if res.master is not None:
            p = out_dir / output.csv_name(scenario.name, case.label, "master")
            output.write_master_csv(p, res.master)
            files.append(p)
        if res.semiclassical is not None:
            p = out_dir / output.csv_name(scenario.name, case.label, "semiclassical")
            output.write_semiclassical_csv(p, res.semiclassical)
            files.append(p)
        if res.bo is not None:
            p = out_dir / output.csv_name(scenario.name, case.label, "bo")
            output.write_bo_csv(p, res.bo)
            files.append(p)
        if res.twa is not None:
            p = out_dir / output.csv_name(scenario.name, case.label, "twa")
            output.write_twa_csv(p, res.twa)
            files.append(p)
        for (i, t, q, grid) in res.q_grids:
            p = out_dir / output.q_grid_name(scenario.name, case.label, i)
            output.write_q_grid(p, q, grid, t, res.q_entries[i][2], q_normalized)
            files.append(p)
        if res.q_entries:
            p = out_dir / f"{scenario.name}__{case.label}__qstats.csv"
            output.write_qstats_csv(p, res.q_entries)
            files.append(p)

    manifest = output.write_manifest(
        out_dir, scenario, use_seed, kernels.active_backend(), config_source,
        files, q_normalized, violations,
    )
    return BundleResult(
        scenario=scenario, out_dir=out_dir, cases=case_results,
        manifest_path=manifest, monitor_violations=violations,
    )


# --- cross-method comparison ------------------------------------------------


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    data = np.array(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def _window_stats(dev: np.ndarray, sel: np.ndarray) -> dict:
    if not sel.any():
        return {"n": 0, "rms": None, "max": None}
    d = dev[sel]
    return {"n": int(sel.sum()), "rms": float(np.sqrt(np.mean(d * d))),
            "max": float(np.max(np.abs(d)))}


def compare_methods(bundle_dir: Path) -> dict:
    """Per-case relative deviations of each method from the master run.

    Deviations are |x - x_ref| normalized by the window maximum of |x_ref|;
    windows: early t < 1/gamma_b_eff, late t > 3/gamma_b_eff.
    """
    bundle_dir = Path(bundle_dir)
    manifests = sorted(bundle_dir.glob("*__manifest.json"))
    if not manifests:
        raise ConfigError(f"no manifest found in {bundle_dir}")
    report: dict = {"bundle": str(bundle_dir), "scenarios": {}}
    for mpath in manifests:
        manifest = json.loads(mpath.read_text())
        name = manifest["scenario"]["name"]
        methods = manifest["scenario"]["methods"]
        if len(methods) < 2:
            raise ConfigError(f"{name}: need at least two methods to compare")
        if "master" not in methods:
            raise ConfigError(f"{name}: comparison needs the master reference")
        sc_report = {}
        for case in manifest["scenario"]["cases"]:
            label = case["label"]
            gb = case["gamma_b_eff"]
            ref = _read_csv(bundle_dir / output.csv_name(name, label, "master"))
            t = ref["time"]
            early = t < (1.0 / gb if gb > 0 else np.inf)
            late = t > (3.0 / gb if gb > 0 else np.inf)
            case_report = {}
            for method in methods:
                if method == "master":
                    continue
                cols = _COMPARABLES.get(method, {})
                data = _read_csv(bundle_dir / output.csv_name(name, label, method))
                if data["time"].shape != t.shape or not np.allclose(data["time"], t, atol=1e-9):
                    raise ConfigError(f"{name}/{label}/{method}: sample grids are misaligned")
                m_report = {}
                for qty, col in cols.items():
                    ref_col = {"abs_b": "abs_b", "n_a": "n_a", "var_b": "var_b"}[qty]
                    x, y = ref[ref_col], data[col]
                    m_report[qty] = {}
                    for wname, sel in (("early", early), ("late", late)):
                        scale = np.max(np.abs(x[sel])) if sel.any() else 1.0
                        scale = max(scale, 1e-12)
                        dev = (y - x) / scale
                        m_report[qty][wname] = _window_stats(dev, sel)
                case_report[method] = m_report
            sc_report[label] = case_report
        report["scenarios"][name] = sc_report
    return report


def render_report(report: dict) -> str:
    lines = [f"bundle: {report['bundle']}"]
    for name, cases in report["scenarios"].items():
        lines.append(f"scenario {name}:")
        for label, methods in cases.items():
            for method, qtys in methods.items():
                for qty, windows in qtys.items():
                    parts = []
                    for wname, st in windows.items():
                        if st["n"] == 0:
                            parts.append(f"{wname}: n/a")
                        else:
                            parts.append(
                                f"{wname}: rms {st['rms']:.3g}, max {st['max']:.3g} "
                                f"(n={st['n']})"
                            )
                    lines.append(f"  {label} {method} {qty}: " + "; ".join(parts))
    return "\n".join(lines) + "\n"
