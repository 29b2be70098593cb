import pytest

from conftest import cloud_site, component, make_spec, make_topology, sink, site, source, uplink
from edge_fabric.errors import ConfigError
from edge_fabric.fabric import compile, placement_from_components
from edge_fabric.model.workload import SensorModel, SourceWorkload, WorkloadSpec, generate
from edge_fabric.simulator import (
    DEFERRED, SENT, SENT_OVERSHOOT, SimConfig, Simulation, TokenBucket, read_metrics_csv, run,
    simulation_runner, transmit, write_metrics_csv,
)
from edge_fabric.simulator.metrics import FIGURE3_COLUMNS, METRICS_COLUMNS, figure3_frame


def _workload(rate=10.0, duration=5.0, source_id="s"):
    return WorkloadSpec((SourceWorkload(source_id, 1, SensorModel("constant", level=1.0), rate),), duration, 0)


def _plan(spec, topology, a_site="cloud"):
    return compile(spec, topology, placement_from_components(spec, topology, {"a": a_site}))


def _run(plan, workload=None, **config):
    workload = workload or _workload()
    config = dict({"duration_s": workload.duration_s, "metrics_window_s": 5, "drain_s": 5}, **config)
    return run(plan, generate(workload), SimConfig(**config))


# ---------------------------------------------------------------- token bucket

def test_token_bucket_sequence():
    bucket = TokenBucket(1000)
    assert bucket.tokens_bits == 2000
    assert transmit(bucket, 1500) == SENT
    assert transmit(bucket, 1000) == SENT_OVERSHOOT
    assert bucket.tokens_bits == -500
    assert transmit(bucket, 10) == DEFERRED
    bucket.refill(1.0)
    assert bucket.tokens_bits == 500
    assert transmit(bucket, 1000, head_of_line=False) == DEFERRED


def test_token_bucket_refill_is_capped():
    bucket = TokenBucket(1000, tokens_bits=0)
    bucket.refill(10.0)
    assert bucket.tokens_bits == 2000


def test_cap_reduction_revokes_tokens():
    bucket = TokenBucket(1000)
    bucket.set_cap(100)
    assert bucket.tokens_bits == 0
    assert bucket.capacity_bits == 200
    bucket.refill(1.0)
    assert bucket.tokens_bits == 100


def test_cap_increase_keeps_tokens():
    bucket = TokenBucket(100, tokens_bits=50)
    bucket.set_cap(1000)
    assert bucket.tokens_bits == 50


def test_sim_config_rejects_misaligned_interval():
    with pytest.raises(ConfigError):
        SimConfig(duration_s=1, tick_ms=100, control_interval_ms=250)


@pytest.mark.parametrize("kwargs", [{"duration_s": 0}, {"duration_s": 1, "ewma_alpha": 0},
                                    {"duration_s": 1, "drain_s": -1}, {"duration_s": 1, "seed": -1}])
def test_sim_config_ranges(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(**kwargs)


# ---------------------------------------------------------------- end to end

def test_every_record_reaches_the_sink(pipeline_spec, one_edge_topology):
    series = _run(_plan(pipeline_spec, one_edge_topology))
    assert series.totals.sources["s"].records == 50
    assert series.totals.sinks["k"].records == 50
    assert series.totals.channels["s->a"].records_sent == 50
    assert series.totals.components["enc:s->a"].msgs_processed == 50
    assert series.totals.components["dec:s->a"].msgs_processed == 50


def test_sink_bytes_use_modeled_sizes(pipeline_spec, one_edge_topology):
    series = _run(_plan(pipeline_spec, one_edge_topology))
    assert series.totals.sources["s"].bytes == 50 * 100
    assert series.totals.sinks["k"].bytes == 50 * 100


def test_windows_and_trace(pipeline_spec, one_edge_topology):
    series = _run(_plan(pipeline_spec, one_edge_topology))
    assert [w.start_s for w in series.windows][:1] == [0.0]
    assert series.windows[0].end_s == 5.0
    assert series.windows[0].sources["s"].records == 50
    frame = figure3_frame(series)
    assert list(frame.columns) == FIGURE3_COLUMNS
    assert list(frame["t_s"][:5]) == [0, 1, 2, 3, 4]
    assert set(frame["cap_bits_s"]) == {5e6}
    assert set(frame["codec"]) == {"json"}


def test_runs_are_deterministic(pipeline_spec, one_edge_topology):
    plan = _plan(pipeline_spec, one_edge_topology)
    workload = WorkloadSpec((SourceWorkload("s", 3, SensorModel("sine_noise", noise_sd=1.0), 20.0),), 4.0, 9)
    first = _run(plan, workload)
    second = _run(plan, workload)
    assert first.windows == second.windows
    assert first.trace == second.trace


def test_snapshot_does_not_disturb_the_run(pipeline_spec, one_edge_topology):
    plan = _plan(pipeline_spec, one_edge_topology)
    config = SimConfig(duration_s=5, metrics_window_s=5, drain_s=5)
    sim = Simulation(plan, generate(_workload()), config)
    for _ in range(23):
        sim.step()
    snap = sim.snapshot()
    assert snap == sim.snapshot()
    assert snap.end_s == pytest.approx(2.3)
    assert snap.sources["s"].records == 23
    assert sim.run().windows == run(plan, generate(_workload()), config).windows


def test_empty_workload(pipeline_spec, one_edge_topology):
    series = run(_plan(pipeline_spec, one_edge_topology), iter([]), SimConfig(duration_s=2, metrics_window_s=1))
    assert len(series.windows) == 2
    assert series.totals.sinks["k"].records == 0
    assert all(row.sent_bits_s == 0 and row.backlog_bytes == 0 for row in series.trace)


def test_undeclared_workload_source(pipeline_spec, one_edge_topology):
    with pytest.raises(ConfigError):
        _run(_plan(pipeline_spec, one_edge_topology), _workload(source_id="ghost"))


def test_site_cpu_limits_throughput(pipeline_spec):
    topology = make_topology([cloud_site(), site("edge1", cpu=0.05)], [uplink("edge1")])
    series = _run(_plan(pipeline_spec, topology, "edge1"), _workload(rate=100.0), drain_s=0)
    assert series.totals.components["a"].msgs_processed == 250
    window = series.windows[0]
    assert window.components["a"].queue_len == 250
    assert window.sites["edge1"].cpu_utilization == pytest.approx(1.0)
    assert window.sites["edge1"].mem_utilization == pytest.approx(64 / 2048)


def test_selectivity_thins_exactly():
    topology = make_topology([cloud_site(), site("edge1")], [uplink("edge1")])
    spec = make_spec([source()], [component("a", selectivity=0.3)], [sink()], [("s", "a"), ("a", "k")])
    series = _run(_plan(spec, topology, "edge1"))
    assert series.totals.components["a"].msgs_out == 15
    assert series.totals.sinks["k"].records == 15


def test_seed_moves_emissions_but_not_totals():
    topology = make_topology([cloud_site(), site("edge1")], [uplink("edge1")])
    spec = make_spec([source()], [component("a", selectivity=0.3)], [sink()], [("s", "a"), ("a", "k")])
    plan = _plan(spec, topology, "edge1")
    trajectories = set()
    for seed in range(20):
        sim = Simulation(plan, generate(_workload()),
                         SimConfig(duration_s=5, metrics_window_s=10, drain_s=5, seed=seed))
        emitted = []
        for _ in range(50):
            sim.step()
            emitted.append(sim.snapshot().components["a"].msgs_out)
        assert all(abs(out - 0.3 * n) < 1 for n, out in enumerate(emitted, start=1))
        trajectories.add(tuple(emitted))
        totals = sim.run().totals
        assert totals.components["a"].msgs_out == 15
        assert totals.sinks["k"].records == 15
    assert len(trajectories) > 1


def test_swap_plan_mid_run(pipeline_spec, one_edge_topology):
    plan = _plan(pipeline_spec, one_edge_topology)
    sim = Simulation(plan, generate(_workload()), SimConfig(duration_s=5, metrics_window_s=5, drain_s=5))
    for _ in range(25):
        sim.step()
    sim.swap_plan(_plan(pipeline_spec, one_edge_topology, "edge1"))
    assert [ch.id for ch in sim.uplinks] == ["a->k"]
    series = sim.run()
    assert series.totals.sinks["k"].records == 50


def test_swap_plan_needs_the_same_spec(pipeline_spec, one_edge_topology):
    sim = Simulation(_plan(pipeline_spec, one_edge_topology), iter([]), SimConfig(duration_s=1))
    other = make_spec([source()], [component("a", cpu=0.5)], [sink()], [("s", "a"), ("a", "k")])
    with pytest.raises(ConfigError):
        sim.swap_plan(_plan(other, one_edge_topology))


def test_r1_record_conservation(r1_dir):
    from edge_fabric.cli.scenario import load_scenario

    scenario = load_scenario(r1_dir / "scenario.json")
    placement = placement_from_components(scenario.spec, scenario.topology,
                                          {c.id: "cloud" for c in scenario.spec.components})
    series = run(compile(scenario.spec, scenario.topology, placement), scenario.records(), scenario.sim)
    totals = series.totals
    assert totals.sources["sensors"].records == 10_000
    assert totals.components["parse"].msgs_out == 10_000
    assert totals.components["filter"].msgs_out == 2_000
    assert totals.components["aggregate"].msgs_out == 100
    assert totals.sinks["store"].records == 100
    assert totals.sinks["feed"].records == 100


def test_simulation_runner_uses_the_requested_duration(pipeline_spec, one_edge_topology):
    runner = simulation_runner(_workload(duration=60.0), SimConfig(duration_s=60))
    series = runner(_plan(pipeline_spec, one_edge_topology), 3.0)
    assert series.totals.sources["s"].records == 30
    assert series.duration_s == 3.0


def test_metrics_csv(tmp_path, pipeline_spec, one_edge_topology):
    series = _run(_plan(pipeline_spec, one_edge_topology))
    path = tmp_path / "metrics.csv"
    write_metrics_csv(series, path)
    data, totals = read_metrics_csv(path)
    assert list(data.columns) == METRICS_COLUMNS
    sink_rows = totals[(totals["entity_kind"] == "sink") & (totals["metric"] == "records")]
    assert sink_rows["value"].tolist() == ["50"]
    codec_rows = data[data["entity_kind"] == "codec"]
    assert set(codec_rows["entity_id"]) == {"enc:s->a", "dec:s->a"}
    assert "cpu_units_used" in set(data["metric"])
