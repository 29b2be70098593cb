# src/edge_fabric/cli/main.py
"""
edge-fabric command line.

    edge-fabric validate --scenario s.json
    edge-fabric compile --scenario s.json [--out dir]
    edge-fabric analyze --scenario s.json
    edge-fabric simulate --scenario s.json [--seed N]
    edge-fabric optimize-placement --scenario s.json
    edge-fabric replay-comm --scenario s.json
    edge-fabric simulate --sweep a.json b.json c.json

Exit codes: 0 success, 2 input error (message on stderr), 1 internal error.
"""
import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional

from config import settings
from edge_fabric.analysis.cost_model import cost_frame, cost_rate, render_cost_table
from edge_fabric.analysis.rates import edge_cpu_utilization, steady_rates
from edge_fabric.cli.scenario import Scenario, load_scenario
from edge_fabric.control.placement_optimizer import figure2_frame, moves_frame, optimize
from edge_fabric.errors import ConfigError, EdgeFabricError, InputError
from edge_fabric.fabric.compiler import compile, serialize_placement
from edge_fabric.fabric.plan import PhysicalPlan
from edge_fabric.fabric.report import render_plan_report
from edge_fabric.model.topology import bandwidth_at
from edge_fabric.simulator.engine import Simulation, simulation_runner
from edge_fabric.simulator.metrics import MetricsSeries, figure3_frame, write_metrics_csv
from shared_services.artifact_store import ArtifactStore

logger = logging.getLogger("edge_fabric.cli")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2


def _store(scenario: Scenario, out: Optional[str]) -> ArtifactStore:
    return ArtifactStore(out or scenario.output_dir or settings.OUTPUT_DIR)


def _plan(scenario: Scenario) -> PhysicalPlan:
    scenario.require_valid()
    return compile(scenario.spec, scenario.topology, scenario.start_placement())


def _simulate(scenario: Scenario, plan: PhysicalPlan) -> MetricsSeries:
    return Simulation(plan, scenario.records(), scenario.require_sim()).run()


def summary_text(plan: PhysicalPlan, series: MetricsSeries) -> str:
    """Run totals that mirror the #TOTAL block of metrics.csv, plus the observed cost rate."""
    totals = series.totals
    lines = [f"spec: {plan.spec.name}", f"simulated_s: {series.duration_s:g}", f"windows: {len(series.windows)}", ""]
    for source_id, m in sorted(totals.sources.items()):
        lines.append(f"source {source_id} records {m.records} bytes {m.bytes!r}")
    for sink_id, m in sorted(totals.sinks.items()):
        lines.append(f"sink {sink_id} records {m.records} bytes {m.bytes!r}")
    for channel_id, m in sorted(totals.channels.items()):
        lines.append(f"channel {channel_id} bytes_offered_raw {m.bytes_offered_raw} "
                     f"bytes_sent_encoded {m.bytes_sent_encoded} records_sent {m.records_sent} "
                     f"backlog_bytes {m.backlog_bytes}")
    if series.duration_s > 0:
        lines.append("")
        lines.append(f"observed cost usd/h: {cost_rate(plan, totals).total / 1e6:.6f}")
    return "\n".join(lines) + "\n"


def cmd_validate(scenario: Scenario, out: Optional[str]) -> int:
    print(scenario.report.render().rstrip("\n"))
    return EXIT_OK if scenario.report.ok else EXIT_INPUT


def cmd_compile(scenario: Scenario, out: Optional[str]) -> int:
    plan = _plan(scenario)
    text = render_plan_report(plan)
    _store(scenario, out).write_text("plan.txt", text)
    print(text, end="")
    return EXIT_OK


def cmd_analyze(scenario: Scenario, out: Optional[str]) -> int:
    plan = _plan(scenario)
    rates = steady_rates(plan.spec)
    breakdown = cost_rate(plan, rates)
    util, _ = edge_cpu_utilization(plan, rates)
    _store(scenario, out).write_frame("cost.csv", cost_frame(breakdown))
    print(render_cost_table(breakdown), end="")
    print(f"edge cpu utilization: {util:.4f}")
    return EXIT_OK


def cmd_simulate(scenario: Scenario, out: Optional[str]) -> int:
    plan = _plan(scenario)
    series = _simulate(scenario, plan)
    store = _store(scenario, out)
    write_metrics_csv(series, store.path("metrics.csv"))
    store.write_text("plan.txt", render_plan_report(plan))
    store.write_text("summary.txt", summary_text(plan, series))
    return EXIT_OK


def cmd_optimize_placement(scenario: Scenario, out: Optional[str]) -> int:
    scenario.require_valid()
    runner = None
    if scenario.optimizer.use_shadowing:
        if scenario.workload is None:
            raise ConfigError(f"{scenario.path}: shadowing needs a generated workload")
        runner = simulation_runner(scenario.workload, scenario.require_sim())
    placement, moves = optimize(scenario.spec, scenario.topology, scenario.optimizer, runner)
    store = _store(scenario, out)
    store.write_frame("moves.csv", moves_frame(moves))
    store.write_frame("figure2.csv", figure2_frame(scenario.spec, scenario.topology, moves))
    store.write_text("final_placement.json", serialize_placement(placement, scenario.spec))
    print(f"{len(moves)} move(s); final placement written to {store.path('final_placement.json')}")
    return EXIT_OK


def cmd_replay_comm(scenario: Scenario, out: Optional[str]) -> int:
    plan = _plan(scenario)
    uplinks = sorted(plan.uplinks(), key=lambda ch: ch.id)
    first = next((ch for ch in uplinks
                  if len(plan.topology.route(ch.from_site, ch.to_site)[0].bandwidth_schedule.steps) >= 2), None)
    if first is None:
        raise ConfigError(f"{scenario.path}: no uplink has a bandwidth schedule with 2 or more steps")
    series = _simulate(scenario, plan)
    frame = figure3_frame(series, first.id)
    store = _store(scenario, out)
    store.write_frame("figure3.csv", frame)
    write_metrics_csv(series, store.path("metrics.csv"))

    link = plan.topology.route(first.from_site, first.to_site)[0]
    peak = max((row.sent_bits_s / row.cap_bits_s for row in series.trace
                if row.channel == first.id and row.cap_bits_s < bandwidth_at(link, 0)), default=0.0)
    print(f"channel {first.id}: peak sent/cap during reduced-cap seconds {peak:.3f}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[Scenario, Optional[str]], int]] = {
    "validate": cmd_validate,
    "compile": cmd_compile,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "optimize-placement": cmd_optimize_placement,
    "replay-comm": cmd_replay_comm,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="Path to the scenario JSON file")
    common.add_argument("--out", help="Output directory (default: scenario output_dir, then EDGE_FABRIC_OUTPUT_DIR)")
    common.add_argument("--seed", type=int, help="Overrides the scenario seed")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    common.add_argument("--sweep", nargs="+", metavar="SCENARIO",
                        help="Run the command over several scenarios in parallel, one output subdirectory each")

    parser = argparse.ArgumentParser(prog="edge-fabric", description="Edge/cloud IoT pipeline simulator and optimizer")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run_command(command: str, scenario_path: str, out: Optional[str], seed: Optional[int]) -> int:
    """Load a scenario and run one command on it, mapping errors to exit codes."""
    try:
        if seed is not None and not 0 <= seed < 2 ** 64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {seed}")
        scenario = load_scenario(scenario_path, seed)
        return COMMANDS[command](scenario, out)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except EdgeFabricError as e:
        logger.error(f"{command} failed: {e}", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:
        logger.error(f"Unhandled exception in {command}: {e}", exc_info=True)
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def _sweep_one(job) -> int:
    command, scenario_path, out, seed, level = job
    logging.basicConfig(level=level, format=settings.LOG_FORMAT)
    return run_command(command, scenario_path, out, seed)


def run_sweep(command: str, scenarios: List[str], out: Optional[str], seed: Optional[int], level: int) -> int:
    jobs = []
    for path in scenarios:
        sub_out = str(Path(out) / Path(path).stem) if out else None
        jobs.append((command, path, sub_out, seed, level))
    with ProcessPoolExecutor() as pool:
        codes = list(pool.map(_sweep_one, jobs))
    for path, code in zip(scenarios, codes):
        logger.info(f"{command} {path}: exit {code}")
    return max(codes, default=EXIT_OK)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logging.basicConfig(level=level, format=settings.LOG_FORMAT)

    if args.sweep:
        return run_sweep(args.command, args.sweep, args.out, args.seed, level)
    if not args.scenario:
        print("error: --scenario is required", file=sys.stderr)
        return EXIT_INPUT
    return run_command(args.command, args.scenario, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
