"""Command-line interface: plan, simulate, control, benchmark.

Project and tracking files are JSON documents (schemas in the README);
every tabular output is comma-delimited with a single header row and every
randomized step echoes its seed so runs can be audited and reproduced.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from sedm import benchmark as bench
from sedm import curves, fixtures, milestone, simulate, svgplot
from sedm.curves import MEASURE_WORK, TrackingLog, control_snapshot, planned_curve
from sedm.network import (
    ProjectNetwork,
    baseline_schedule,
    network_from_dict,
    serial_parallel_indicator,
    validate,
)


class InputError(Exception):
    """A user-supplied file failed to parse or validate (exit status 2)."""


def _load_json(path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_project(path) -> ProjectNetwork:
    doc = _load_json(path, "project")
    try:
        network = network_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad project document: {exc}") from None
    issues = validate(network)
    if issues:
        raise InputError(f"{path}: invalid project:\n  " + "\n  ".join(issues))
    return network


def load_tracking(path, network: ProjectNetwork) -> TrackingLog:
    doc = _load_json(path, "tracking")
    try:
        periods = [
            (
                int(p["period"]),
                {
                    str(e["activity"]): (bool(e["worked"]), float(e["completion"]))
                    for e in p.get("entries", [])
                },
            )
            for p in doc["periods"]
        ]
        return TrackingLog.from_periods([a.id for a in network.activities], periods)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad tracking document: {exc}") from None


def _config_from_args(args) -> bench.AnalysisConfig:
    if getattr(args, "config", None):
        try:
            config = bench.AnalysisConfig.from_file(args.config)
        except (ValueError, TypeError, FileNotFoundError) as exc:
            raise InputError(f"{args.config}: {exc}") from None
    else:
        config = bench.AnalysisConfig()
    overrides = {}
    if getattr(args, "runs", None) is not None:
        overrides["n_runs"] = args.runs
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    return config


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_plan(args) -> int:
    network = load_project(args.project)
    schedule = baseline_schedule(network)
    levels, n_s = network.levels, network.n_s
    print(f"project: {network.name}")
    print(f"BPD: {schedule.project_duration:g}")
    print(f"TPD_final: {network.tpd_final:g}")
    print(f"n_s: {n_s}")
    print(f"n_t: {network.n_t}")
    if network.n_t > 1:
        print(f"SP: {serial_parallel_indicator(n_s, network.n_t):.6f}")
    else:
        print("SP: undefined (single activity)")
    print("schedule:")
    print("activity,level,start,finish")
    for a in network.activities:
        print(f"{a.id},{levels[a.id]},{schedule.start[a.id]:g},{schedule.finish[a.id]:g}")
    curve = planned_curve(network, schedule, args.measure)
    if args.curve_out:
        curve.write(args.curve_out)
        print(f"planned curve written to {args.curve_out}")
    else:
        print(f"planned curve ({curve.measure}):")
        print("period,value")
        for p, v in enumerate(curve.values):
            print(f"{p},{v:g}")
    return 0


def cmd_simulate(args) -> int:
    network = load_project(args.project)
    config = _config_from_args(args)
    run_config = simulate.RunConfig(
        n_runs=config.n_runs,
        master_seed=config.master_seed,
        value_measure=args.measure,
        store_trajectories=not args.no_trajectories,
    )
    store = simulate.run_simulation(network, run_config, workers=args.workers)
    simulate.save_store(store, args.out)
    finals = store.finals()
    afd = finals["afd"]
    print(f"store written to {args.out}")
    print(f"n_runs: {run_config.n_runs}")
    print(f"master_seed: {run_config.master_seed}")
    print(f"P(delay): {np.mean(finals['delay_flag']):.4f}")
    print(f"mean AFD: {np.mean(afd):.4f}")
    for q in (5, 25, 50, 75, 95):
        print(f"AFD q{q:02d}: {np.percentile(afd, q):.4f}")
    return 0


def cmd_control(args) -> int:
    network = load_project(args.project)
    log = load_tracking(args.tracking, network)
    store = simulate.load_store(args.store, network)
    config = _config_from_args(args)
    measure = store.config.value_measure
    planned = planned_curve(network, baseline_schedule(network), measure)
    try:
        snapshot = control_snapshot(network, log, args.at, planned, measure)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    forecast_fn = (
        bench.sedm_forecast if measure == MEASURE_WORK else bench.sevm_forecast
    )
    result = forecast_fn(snapshot, store, config)
    print(f"project: {network.name}")
    print(f"control period (AD): {snapshot.ad}")
    print(f"master_seed: {config.master_seed}")
    print(f"TED: {snapshot.ted:.4f}")
    print(f"TAD: {snapshot.tad:.4f}")
    print(f"ED(t): {snapshot.ed_t:.4f}")
    print(f"PPI: {100 * snapshot.ppi:.4f}%")
    if result.note:
        print(f"note: {result.note}")
    if result.anomaly_percentile is not None:
        print(f"anomaly percentile: {result.anomaly_percentile:.4f}")
    if result.p_delay is not None:
        print(f"P(delay): {result.p_delay:.4f}")
    print(f"expected deviation: {result.expected_deviation:.4f}")
    print(f"EDAC: {result.edac:.4f}")
    if result.classifier:
        print(f"selected classifier: {result.classifier}")
    if result.regressor:
        print(f"selected regressor: {result.regressor}")
    for name, report in (
        ("classification", result.classification_cv),
        ("regression", result.regression_cv),
    ):
        if report is not None:
            print(f"{name} cross-validation:")
            print(report.format_table())

    if args.export_cloud or args.export_density:
        cloud = milestone.build_point_cloud(store, snapshot.ted)
        if args.export_cloud:
            cloud.write(args.export_cloud)
            print(f"point cloud written to {args.export_cloud}")
        if args.export_density:
            model = milestone.fit_kde(cloud, config.bandwidth_x, config.bandwidth_y)
            xs, ys, dens = milestone.kde_grid(model, nx=args.grid, ny=args.grid)
            milestone.write_density_grid(args.export_density, xs, ys, dens)
            print(f"density grid written to {args.export_density}")
    return 0


def cmd_benchmark(args) -> int:
    network = load_project(args.project)
    log = load_tracking(args.tracking, network)
    config = _config_from_args(args)
    methods = tuple(m.strip().upper() for m in args.methods.split(","))
    store = None
    if args.store:
        store = simulate.load_store(args.store, network)
        if store.config.value_measure != MEASURE_WORK:
            raise InputError("--store must hold a work-period simulation")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = bench.run_benchmark(
        network, log, args.rd, methods=methods, config=config, store=store
    )
    forecasts_path = out_dir / "edac_table.csv"
    summary_path = out_dir / "mape_summary.csv"
    report.write_forecasts(forecasts_path)
    report.write_summary(summary_path)

    series = {
        m: (
            [float(f.control_time) for f in report.forecasts[m]],
            [float(f.edac) for f in report.forecasts[m]],
        )
        for m in report.forecasts
    }
    line_path = out_dir / "edac_vs_time.svg"
    svgplot.line_plot(
        series, line_path,
        title=f"Final duration estimates: {network.name}",
        xlabel="control period", ylabel="EDAC (periods)",
        guides={"RD": args.rd},
    )
    labels = list(report.forecasts)
    bar_path = out_dir / "mape_summary.svg"
    svgplot.bar_chart(
        labels, [report.mape_of(m) for m in labels], bar_path,
        title="Forecast accuracy", ylabel="MAPE (%)",
    )
    print(f"master_seed: {config.master_seed}")
    print(f"rd: {args.rd:g}")
    print("method,mape")
    for m in labels:
        print(f"{m},{report.mape_of(m):.4f}")
    for p in (forecasts_path, summary_path, line_path, bar_path):
        print(f"written: {p}")
    return 0


def cmd_fixtures(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    net = fixtures.residential13()
    fixtures.write_project_file(net, out_dir / "residential13.project.json")
    log, rd = fixtures.sampled_tracking(net, seed=args.seed)
    fixtures.write_tracking_file(log, out_dir / "residential13.tracking.json")
    demo = fixtures.milestone_demo()
    fixtures.write_project_file(demo, out_dir / "milestone_demo.project.json")
    fixtures.write_tracking_file(
        fixtures.milestone_demo_tracking(), out_dir / "milestone_demo.tracking.json"
    )
    print(f"fixtures written to {out_dir}")
    print(f"residential13 sampled execution rd: {rd!r} (seed {args.seed})")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sedm",
        description="Stochastic earned duration analysis for project schedules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="baseline schedule, topology and planned curve")
    p.add_argument("project")
    p.add_argument("--measure", choices=curves.MEASURES, default=MEASURE_WORK)
    p.add_argument("--curve-out", help="write the planned curve to this file")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="Monte Carlo simulation into a store file")
    p.add_argument("project")
    p.add_argument("--out", required=True, help="store file to write")
    p.add_argument("--runs", type=int, help="number of simulated executions")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--measure", choices=curves.MEASURES, default=MEASURE_WORK)
    p.add_argument("--no-trajectories", action="store_true",
                   help="keep only final outcomes in the store")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("control", help="milestone report against a simulation store")
    p.add_argument("project")
    p.add_argument("tracking")
    p.add_argument("store")
    p.add_argument("--at", type=int, required=True, help="control period")
    p.add_argument("--seed", type=int, help="master seed for model selection")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--export-cloud", help="write the milestone point cloud CSV here")
    p.add_argument("--export-density", help="write the density grid CSV here")
    p.add_argument("--grid", type=int, default=100, help="density grid resolution")
    p.set_defaults(func=cmd_control)

    p = sub.add_parser("benchmark", help="MAPE comparison of forecasting methods")
    p.add_argument("project")
    p.add_argument("tracking")
    p.add_argument("--rd", type=float, required=True, help="realized duration")
    p.add_argument("--methods", default="ESM,SEVM,SEDM")
    p.add_argument("--store", help="reuse an existing work-period store file")
    p.add_argument("--out-dir", default="sedm-benchmark")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON config file")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("fixtures", help="write the bundled example files")
    p.add_argument("--out-dir", default="fixtures")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_fixtures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (simulate.FingerprintMismatch, simulate.StoreFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
