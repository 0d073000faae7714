"""Command-line front end.

Subcommands: solve (and its alias nep), thresholds, sweep, worst,
simulate, validate.  Every command reads a scenario file; loads are
given either absolutely with --load (jobs/second) or normalized with
--rho (fraction of total capacity).  Human-readable output is printed
with 6 significant digits; CSV output keeps full double precision.

Exit codes: 0 success, 2 scenario/argument parse error, 3 infeasible
load, 4 numeric failure, 5 validation mismatch.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .delay_modes import DelayMode, poa_under_mode, solve_under_mode, transformed_scenarios
from .errors import (
    ConvergenceError,
    DomainError,
    InfeasibleLoadError,
    InversionError,
    SaturationError,
    ScenarioParseError,
    UnsupportedModelError,
)
from .latency import latency, zero_load_latency
from .poa import default_grid, poa_at, worst_case_poa
from .scenario_io import ScenarioDocument, SimSettings, load_scenario_file
from .simulator import SimulationConfig, simulate, validate
from .solver import (
    AllocationKind,
    Scenario,
    SolverConfig,
    activation_thresholds,
    solve_nep,
    solve_optimal,
)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _grid_spec(text: str) -> tuple[float, float, int]:
    """Parse LO:HI:COUNT (rho range, log-spaced in 1 - rho)."""
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if not (0.0 < lo < hi < 1.0) or count < 2:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected RHO_LO:RHO_HI:COUNT with 0 < lo < hi < 1, got '{text}'"
        ) from None
    return lo, hi, count


def _load_document(args) -> ScenarioDocument:
    doc = load_scenario_file(args.scenario)
    if getattr(args, "resolution", None) is not None:
        sc = doc.scenario
        config = SolverConfig(resolution=args.resolution, eps_sat=sc.config.eps_sat)
        doc = ScenarioDocument(Scenario(sc.servers, config), doc.sweep, doc.simulation)
    return doc


def _resolve_load(sc: Scenario, args) -> float:
    if args.load is not None:
        return args.load
    return args.rho * sc.total_mu


def _write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            fh.close()


def _server_label(s) -> tuple[str, str, str]:
    return _fmt(s.d * 1000.0), _fmt(s.mu), _fmt(s.cv)


def _cmd_solve(args, kind: AllocationKind | None = None) -> int:
    doc = _load_document(args)
    sc = doc.scenario
    lam = _resolve_load(sc, args)
    if kind is None:
        kind = AllocationKind(args.kind)
    mode = DelayMode(args.delay_mode)
    moded = solve_under_mode(sc, lam, kind, mode)
    result = moded.result
    _, eval_sc = transformed_scenarios(sc, mode)

    print(f"kind: {kind.value}    delay mode: {mode.value}")
    print(f"load: {_fmt(lam)} jobs/s    rho: {_fmt(lam / sc.total_mu)}")
    print(f"active servers: {result.active_count} of {len(sc.servers)}")
    print(f"multiplier: {_fmt(result.multiplier)} s")
    print(f"solved mean latency: {_fmt(result.mean_latency)} s")
    print(f"evaluated mean latency: {_fmt(moded.evaluated_latency)} s")
    print(f"{'server':>6} {'d_ms':>10} {'mu':>10} {'cv':>6} {'model':>7} "
          f"{'p':>12} {'rate':>12} {'latency_s':>12}")
    rows = []
    for i, s in enumerate(sc.servers):
        x = float(result.p[i]) * lam
        lat = latency(eval_sc.servers[i], x)
        d_ms, mu, cv = _server_label(s)
        print(f"{i:>6} {d_ms:>10} {mu:>10} {cv:>6} {s.model.value:>7} "
              f"{_fmt(result.p[i]):>12} {_fmt(x):>12} {_fmt(lat):>12}")
        rows.append([i, s.d * 1000.0, s.mu, s.cv, s.model.value, float(result.p[i]), x, lat])
    if args.out:
        _write_csv(args.out, ["server", "d_ms", "mu", "cv", "model", "p", "rate", "latency_s"],
                   rows)
        print(f"wrote {args.out}")
    return 0


def _cmd_thresholds(args) -> int:
    doc = _load_document(args)
    sc = doc.scenario
    kinds = ([AllocationKind(args.kind)] if args.kind != "both"
             else [AllocationKind.OPTIMAL, AllocationKind.NEP])
    tables = {k: activation_thresholds(sc, k) for k in kinds}
    order = tables[kinds[0]].order

    header = ["position", "server", "d_ms", "mu", "zero_load_latency_s"]
    header += [f"threshold_{k.value}" for k in kinds]
    print(" ".join(f"{h:>20}" for h in header))
    rows = []
    for pos, idx in enumerate(order):
        s = sc.servers[idx]
        row = [pos + 1, idx, s.d * 1000.0, s.mu, zero_load_latency(s)]
        row += [tables[k].loads[pos] for k in kinds]
        rows.append(row)
        print(" ".join(f"{v if isinstance(v, int) else _fmt(v):>20}" for v in row))
    if args.out:
        _write_csv(args.out, header, rows)
        print(f"wrote {args.out}")
    return 0


def _sweep_grid(sc: Scenario, doc: ScenarioDocument, args) -> np.ndarray:
    if args.grid is not None:
        lo, hi, count = args.grid
        return default_grid(sc, count, lo, hi)
    if doc.sweep is not None:
        if doc.sweep.grid is not None:
            return np.asarray(doc.sweep.grid)
        return default_grid(sc, doc.sweep.count, doc.sweep.rho_min, doc.sweep.rho_max)
    return default_grid(sc)


def _cmd_sweep(args) -> int:
    doc = _load_document(args)
    sc = doc.scenario
    mode = DelayMode(args.delay_mode)
    grid = _sweep_grid(sc, doc, args)
    rows = []
    for lam in grid:
        lam = float(lam)
        point = (poa_at(sc, lam) if mode is DelayMode.WITH_DELAYS
                 else poa_under_mode(sc, lam, mode))
        rows.append([point.lam, point.rho, point.u_opt, point.alpha, point.eta,
                     point.j_opt, point.j_nep])
    _write_csv(args.out, ["lam", "rho", "u_opt", "alpha", "eta", "j_opt", "j_nep"], rows)
    if args.out:
        best = max(rows, key=lambda r: r[4])
        print(f"wrote {len(rows)} points to {args.out}; "
              f"max eta {_fmt(best[4])} at lam {_fmt(best[0])} (rho {_fmt(best[1])})")
    return 0


def _cmd_worst(args) -> int:
    doc = _load_document(args)
    sc = doc.scenario
    res = worst_case_poa(sc)
    print(f"{'location':<34} {'lam':>12} {'rho':>10} {'eta':>12}")
    rows = []
    for c in res.candidates:
        lam_s = _fmt(c.lam) if c.lam is not None else "limit"
        rho_s = _fmt(c.lam / sc.total_mu) if c.lam is not None else "1"
        print(f"{c.location:<34} {lam_s:>12} {rho_s:>10} {_fmt(c.eta):>12}")
        rows.append([c.location, c.lam if c.lam is not None else "",
                     c.lam / sc.total_mu if c.lam is not None else 1.0, c.eta])
    lam_s = _fmt(res.max.lam) if res.max.lam is not None else "the full-load limit"
    print(f"worst case: eta {_fmt(res.max.eta)} at {res.max.location}"
          + (f" (lam {lam_s})" if res.max.lam is not None else ""))
    if args.out:
        _write_csv(args.out, ["location", "lam", "rho", "eta"], rows)
        print(f"wrote {args.out}")
    return 0


def _sim_config(doc: ScenarioDocument, args, lam: float, p) -> SimulationConfig:
    base = doc.simulation if doc.simulation is not None else SimSettings()
    return SimulationConfig(
        lam=lam,
        p=tuple(float(q) for q in p),
        horizon_jobs=args.jobs if args.jobs is not None else base.horizon_jobs,
        warmup=base.warmup,
        seed=args.seed if args.seed is not None else base.seed,
        replications=args.reps if args.reps is not None else base.replications,
        raw_samples_path=getattr(args, "raw", None),
    )


def _cmd_simulate(args) -> int:
    doc = _load_document(args)
    sc = doc.scenario
    lam = _resolve_load(sc, args)
    kind = AllocationKind(args.kind)
    solver = solve_optimal if kind is AllocationKind.OPTIMAL else solve_nep
    result = solver(sc, lam)
    cfg = _sim_config(doc, args, lam, result.p)
    report = simulate(sc, cfg)

    print(f"kind: {kind.value}    load: {_fmt(lam)} jobs/s    rho: {_fmt(lam / sc.total_mu)}")
    print(f"replications: {report.replications}    jobs/replication: {cfg.horizon_jobs}    "
          f"seed: {cfg.seed}")
    if report.overloaded:
        print("warning: at least one server is offered load at or above its capacity")
    print(f"aggregate mean latency: {_fmt(report.mean_latency)} s "
          f"(95% ci half-width {_fmt(report.latency_ci)})")
    print(f"analytic mean latency:  {_fmt(result.mean_latency)} s")
    header = ["server", "p", "mean_latency_s", "mean_sojourn_s", "utilization",
              "completed", "arrival_rate", "latency_ci_s"]
    print(" ".join(f"{h:>15}" for h in header))
    rows = []
    for i, st in enumerate(report.per_server):
        row = [i, float(result.p[i]), st.mean_latency, st.mean_sojourn, st.utilization,
               st.completed, st.arrival_rate, st.latency_ci]
        rows.append(row)
        print(" ".join(f"{v if isinstance(v, int) else _fmt(v):>15}" for v in row))
    rows.append(["all", "", report.mean_latency, report.mean_sojourn, report.utilization,
                 report.completed, "", report.latency_ci])
    if args.out:
        _write_csv(args.out, header, rows)
        print(f"wrote {args.out}")
    return 0


def _cmd_validate(args) -> int:
    doc = _load_document(args)
    sc = doc.scenario
    lam = _resolve_load(sc, args)
    kind = AllocationKind(args.kind)
    sim_defaults = doc.simulation if doc.simulation is not None else SimSettings()
    probe = _sim_config(doc, args, lam, [1.0] + [0.0] * (len(sc.servers) - 1))
    cfg = SimulationConfig(lam=lam, p=probe.p, horizon_jobs=probe.horizon_jobs,
                           warmup=sim_defaults.warmup, seed=probe.seed,
                           replications=probe.replications)
    record = validate(sc, lam, kind, cfg, tolerance=args.tolerance)
    print(f"kind: {kind.value}    load: {_fmt(lam)} jobs/s")
    print(f"analytic latency:  {_fmt(record.analytic_latency)} s")
    print(f"empirical latency: {_fmt(record.empirical_latency)} s "
          f"(95% ci half-width {_fmt(record.latency_ci)})")
    print(f"relative gap: {_fmt(record.relative_gap)}    tolerance: {_fmt(record.tolerance)}")
    print("PASS" if record.passed else "FAIL")
    return 0 if record.passed else 5


def _add_common(sub: argparse.ArgumentParser, load: bool = True) -> None:
    sub.add_argument("scenario", help="path to a scenario file")
    sub.add_argument("--resolution", type=float, default=None,
                     help="override the solver's numerical resolution")
    sub.add_argument("--out", default=None, help="write results as CSV to this path")
    if load:
        group = sub.add_mutually_exclusive_group(required=True)
        group.add_argument("--load", type=float, default=None,
                           help="absolute arrival rate, jobs/second")
        group.add_argument("--rho", type=float, default=None,
                           help="normalized load, fraction of total capacity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskalloc",
        description="Optimal and equilibrium task allocation over latency-heterogeneous servers",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="compute one allocation at one load")
    _add_common(solve)
    solve.add_argument("--kind", choices=["optimal", "nep"], default="optimal")
    solve.add_argument("--delay-mode", choices=[m.value for m in DelayMode],
                       default=DelayMode.WITH_DELAYS.value)
    solve.set_defaults(func=_cmd_solve)

    nep = subs.add_parser("nep", help="shorthand for solve --kind nep")
    _add_common(nep)
    nep.add_argument("--delay-mode", choices=[m.value for m in DelayMode],
                     default=DelayMode.WITH_DELAYS.value)
    nep.set_defaults(func=lambda a: _cmd_solve(a, AllocationKind.NEP))

    thresholds = subs.add_parser("thresholds", help="per-server activation loads")
    _add_common(thresholds, load=False)
    thresholds.add_argument("--kind", choices=["optimal", "nep", "both"], default="both")
    thresholds.set_defaults(func=_cmd_thresholds)

    sweep = subs.add_parser("sweep", help="price of anarchy over a load grid (CSV)")
    _add_common(sweep, load=False)
    sweep.add_argument("--grid", type=_grid_spec, default=None, metavar="LO:HI:COUNT",
                       help="rho range, log-spaced in 1-rho (default 0.01:0.999:400)")
    sweep.add_argument("--delay-mode", choices=[m.value for m in DelayMode],
                       default=DelayMode.WITH_DELAYS.value)
    sweep.set_defaults(func=_cmd_sweep)

    worst = subs.add_parser("worst", help="worst-case price of anarchy over all loads")
    _add_common(worst, load=False)
    worst.set_defaults(func=_cmd_worst)

    sim = subs.add_parser("simulate", help="discrete-event simulation of a solved split")
    _add_common(sim)
    sim.add_argument("--kind", choices=["optimal", "nep"], default="optimal")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--jobs", type=int, default=None, help="jobs per replication")
    sim.add_argument("--reps", type=int, default=None, help="number of replications")
    sim.add_argument("--raw", default=None, help="write per-job samples as CSV to this path")
    sim.set_defaults(func=_cmd_simulate)

    val = subs.add_parser("validate", help="check solver output against simulation")
    _add_common(val)
    val.add_argument("--kind", choices=["optimal", "nep"], default="optimal")
    val.add_argument("--seed", type=int, default=None)
    val.add_argument("--jobs", type=int, default=None, help="jobs per replication")
    val.add_argument("--reps", type=int, default=None, help="number of replications")
    val.add_argument("--tolerance", type=float, default=0.03,
                     help="relative gap allowed between analytic and empirical latency")
    val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConvergenceError, InversionError, SaturationError, DomainError,
            UnsupportedModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
