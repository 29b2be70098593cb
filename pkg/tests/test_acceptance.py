import random

import pytest

from conftest import FIXTURES, cloud_site, component, make_spec, make_topology, sink, site, source, uplink
from edge_fabric.analysis import cost_rate, predict_move, steady_rates
from edge_fabric.cli.scenario import load_scenario
from edge_fabric.fabric import apply_move, compile, placement_from_components
from edge_fabric.model.workload import SensorModel, SourceWorkload, WorkloadSpec, generate
from edge_fabric.simulator import SimConfig, run
from edge_fabric.simulator.metrics import figure3_frame

DROP_S = 300
RESTORE_S = 600


@pytest.fixture(scope="module")
def r2_run():
    scenario = load_scenario(FIXTURES / "r2" / "scenario.json")
    plan = compile(scenario.spec, scenario.topology, scenario.start_placement())
    return run(plan, scenario.records(), scenario.sim)


@pytest.fixture(scope="module")
def r2_trace(r2_run):
    return figure3_frame(r2_run).set_index("t_s")


@pytest.mark.slow
def test_r2_decision_reacts_within_one_interval(r2_trace):
    before = r2_trace.loc[DROP_S, ["codec", "batch_window_s"]].tolist()
    after = r2_trace.loc[DROP_S + 1, ["codec", "batch_window_s"]].tolist()
    assert before != after


@pytest.mark.slow
def test_r2_overshoot_is_bounded(r2_trace):
    congested = r2_trace.loc[DROP_S:RESTORE_S - 1]
    ratio = (congested["sent_bits_s"] / congested["cap_bits_s"]).max()
    assert ratio <= 2.5


@pytest.mark.slow
def test_r2_backlog_builds_then_drains(r2_trace):
    assert r2_trace.loc[DROP_S + 10, "backlog_bytes"] > 0
    after = r2_trace.loc[RESTORE_S:]
    drained = after[after["backlog_bytes"] == 0]
    assert not drained.empty
    assert drained.index[0] <= RESTORE_S + 120


@pytest.mark.slow
def test_r2_drain_peaks_then_levels_off(r2_trace):
    restored = r2_trace.loc[RESTORE_S:RESTORE_S + 120, "sent_bits_s"]
    assert restored.max() > 5e6
    tail = r2_trace.loc[840:899, "sent_bits_s"]
    assert tail.mean() < restored.max()


@pytest.mark.slow
def test_r2_every_record_arrives(r2_run):
    totals = r2_run.totals
    assert totals.sources["sensors"].records == 900 * 4000
    assert totals.sinks["store"].records == totals.sources["sensors"].records


# ---------------------------------------------------------------- predicted against realized deltas

def _random_chain(rng):
    n = rng.randint(1, 4)
    rate = rng.randint(20, 50)
    comps = [component(f"c{i}", cpu=rng.choice([0.001, 0.002, 0.005]), selectivity=rng.choice([0.8, 0.9, 1.0]),
                       out_bytes=rng.randint(40, 120)) for i in range(n)]
    chain = ["s"] + [c["id"] for c in comps] + ["k"]
    spec = make_spec([source(rate=rate)], comps, [sink()], list(zip(chain, chain[1:])))
    topology = make_topology(
        [cloud_site(pricing={"per_cpu_unit_second": 0.001, "per_million_invocations": 0.2}), site("edge1", cpu=50.0)],
        [uplink("edge1")])
    start = {c["id"]: rng.choice(["cloud", "edge1"]) for c in comps}
    return spec, topology, start, rate


def _observed_total(plan, rate):
    workload = WorkloadSpec((SourceWorkload("s", 1, SensorModel("constant", level=1.0), float(rate)),), 60.0, 0)
    series = run(plan, generate(workload), SimConfig(duration_s=60, metrics_window_s=30, drain_s=0))
    return cost_rate(plan, series.windows[1]).total


@pytest.mark.parametrize("seed", range(30))
def test_what_if_matches_a_simulated_move(seed):
    rng = random.Random(seed)
    spec, topology, start, rate = _random_chain(rng)
    before = compile(spec, topology, placement_from_components(spec, topology, start))
    moved = rng.choice(sorted(start))
    target = "edge1" if start[moved] == "cloud" else "cloud"
    prediction = predict_move(before, moved, target)
    after = apply_move(before, moved, target)

    realized = _observed_total(after, rate) - _observed_total(before, rate)
    rates = steady_rates(spec)
    scale = max(cost_rate(before, rates).total, cost_rate(after, rates).total)
    assert abs(realized - prediction.delta) <= 0.05 * scale
