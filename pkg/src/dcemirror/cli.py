"""Command-line interface.

Subcommands: run a catalog scenario or a TOML config, list the catalog, and
compare the methods inside a bundle directory.  Exit codes: 0 success, 1
invariant monitor violation, 2 configuration error, 3 cutoff breach, 4
adiabatic-reduction breakdown, 5 trajectory divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .model import (
    BOBreakdownError,
    ConfigError,
    CutoffError,
    IntegrationError,
    TWADivergenceError,
)
from .runner import compare_methods, render_report, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dcemirror",
        description="cavity-mirror photon-pair damping simulations",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a catalog scenario or a TOML config file")
    run.add_argument("scenario", help="catalog name or path to a .toml file")
    run.add_argument("--out-dir", default="out", help="bundle output directory")
    run.add_argument("--seed", type=int, default=None, help="override the ensemble seed")
    run.add_argument("--n-traj", type=int, default=None, help="override trajectory count")
    run.add_argument("--dt", type=float, default=None, help="override the trajectory step")
    run.add_argument("--cutoff-cavity", type=int, default=None)
    run.add_argument("--cutoff-mirror", type=int, default=None)
    run.add_argument("--q-normalized", action="store_true",
                     help="divide quasi-probability values by pi")

    sub.add_parser("list", help="list the built-in scenario catalog")

    cmp_p = sub.add_parser("compare", help="cross-method discrepancy report for a bundle")
    cmp_p.add_argument("bundle", help="bundle directory written by 'run'")
    cmp_p.add_argument("--json", action="store_true", help="emit the report as JSON")
    return ap


def _load_scenario(token: str):
    from .scenarios import get_scenario, parse_scenario

    path = Path(token)
    if path.suffix == ".toml" or path.exists():
        text = path.read_text()
        return parse_scenario(text), f"file:{path.name}"
    return get_scenario(token), f"builtin:{token}"


def _apply_overrides(scenario, args):
    if not any((args.n_traj, args.dt, args.cutoff_cavity, args.cutoff_mirror)):
        return scenario
    cases = []
    for c in scenario.cases:
        updates = {}
        if args.cutoff_cavity is not None:
            updates["cutoff_cavity"] = args.cutoff_cavity
        if args.cutoff_mirror is not None:
            updates["cutoff_mirror"] = args.cutoff_mirror
        if (args.n_traj is not None or args.dt is not None) and c.twa is not None:
            updates["twa"] = dataclasses.replace(
                c.twa,
                **({"n_traj": args.n_traj} if args.n_traj is not None else {}),
                **({"dt": args.dt} if args.dt is not None else {}),
            )
        cases.append(dataclasses.replace(c, **updates) if updates else c)
    return dataclasses.replace(scenario, cases=tuple(cases))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list":
            from .scenarios import CATALOG

            for name, sc in sorted(CATALOG.items()):
                methods = ",".join(sc.methods)
                print(f"{name}: {len(sc.cases)} case(s), methods [{methods}]")
                print(f"    {sc.description}")
                for c in sc.cases:
                    print(
                        f"    - {c.label}: delta={c.delta:g}, omega_c={c.omega_c:.6g}, "
                        f"b0={c.b0:g}, t_final={c.t_final:g}, cutoffs "
                        f"({c.cutoff_cavity},{c.cutoff_mirror})"
                    )
            return 0

        if args.command == "run":
            scenario, source = _load_scenario(args.scenario)
            scenario = _apply_overrides(scenario, args)
            bundle = run_scenario(
                scenario, Path(args.out_dir), seed=args.seed,
                q_normalized=args.q_normalized, config_source=source,
            )
            print(f"bundle written to {bundle.out_dir}")
            if bundle.monitor_violations:
                for v in bundle.monitor_violations:
                    print(f"monitor violation: {v}", file=sys.stderr)
                return 1
            return 0

        if args.command == "compare":
            report = compare_methods(Path(args.bundle))
            if args.json:
                print(json.dumps(report, indent=2, sort_keys=True))
            else:
                print(render_report(report), end="")
            return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CutoffError as exc:
        print(f"cutoff breach: {exc}", file=sys.stderr)
        return 3
    except BOBreakdownError as exc:
        print(f"adiabatic breakdown: {exc}", file=sys.stderr)
        return 4
    except TWADivergenceError as exc:
        print(f"trajectory divergence: {exc}", file=sys.stderr)
        return 5
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
