import itertools

import pytest
from hypothesis import given, settings, strategies as st

from edge_fabric.errors import FieldError, FormatError, OrderError
from edge_fabric.model.workload import (
    Record, SensorModel, SourceWorkload, WorkloadSpec, export_trace, generate, parse_workload, replay,
    sample_count,
)


def _spec(model, sensors=1, rate=1.0, duration=3.0, seed=0, source_id="s"):
    return WorkloadSpec((SourceWorkload(source_id, sensors, model, rate),), duration, seed)


def test_constant_model():
    records = list(generate(_spec(SensorModel("constant", level=20.0))))
    assert records == [("s", Record(0, "s-000", 20.0)), ("s", Record(1000, "s-000", 20.0)),
                       ("s", Record(2000, "s-000", 20.0))]


def test_sine_lattice_is_exact():
    model = SensorModel("sine_noise", amplitude=1.0, period_s=4.0, noise_sd=0.0)
    values = [r.value for _, r in generate(_spec(model, duration=8.0))]
    assert values == [0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0]


def test_sine_level_offsets_the_wave():
    model = SensorModel("sine_noise", level=20.0, amplitude=5.0, period_s=4.0)
    values = [r.value for _, r in generate(_spec(model, duration=4.0))]
    assert values == [20.0, 25.0, 20.0, 15.0]


def test_same_seed_same_stream():
    model = SensorModel("random_walk", step_sd=0.5, start=3.0)
    spec = _spec(model, sensors=4, rate=7.0, duration=5.0, seed=99)
    assert list(generate(spec)) == list(generate(spec))


def test_different_seed_different_stream():
    model = SensorModel("sine_noise", noise_sd=1.0)
    a = [r.value for _, r in generate(_spec(model, seed=1))]
    b = [r.value for _, r in generate(_spec(model, seed=2))]
    assert a != b


def test_chunk_size_does_not_change_the_stream():
    model = SensorModel("random_walk", step_sd=1.0)
    spec = _spec(model, sensors=3, rate=3.0, duration=7.0, seed=5)
    assert list(generate(spec, chunk_s=1.0)) == list(generate(spec, chunk_s=100.0))


def test_random_walk_starts_at_start():
    model = SensorModel("random_walk", step_sd=2.0, start=-4.5)
    first = next(iter(generate(_spec(model, seed=3))))
    assert first[1].value == -4.5


def test_global_order_and_tie_break():
    model = SensorModel("constant")
    spec = WorkloadSpec((SourceWorkload("b", 2, model, 2.0), SourceWorkload("a", 2, model, 1.0)), 2.0, 0)
    keys = [(r.timestamp_ms, s, r.sensor_id) for s, r in generate(spec)]
    assert keys == sorted(keys)
    assert keys[:3] == [(0, "a", "a-000"), (0, "a", "a-001"), (0, "b", "b-000")]


def test_fractional_rate_timestamps():
    records = list(generate(_spec(SensorModel("constant"), rate=3.0, duration=1.0)))
    assert [r.timestamp_ms for _, r in records] == [0, 333, 666]


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.0, 3.0, 7.0, 10.0, 200.0]), st.sampled_from([0.5, 1.0, 2.5, 4.0]))
def test_record_count_per_sensor(rate, duration):
    records = list(generate(_spec(SensorModel("constant"), sensors=2, rate=rate, duration=duration)))
    assert len(records) == 2 * sample_count(rate, duration)
    assert all(r.timestamp_ms < duration * 1000 for _, r in records)


def test_export_then_replay_equals_generate(tmp_path):
    spec = WorkloadSpec((SourceWorkload("a", 3, SensorModel("sine_noise", noise_sd=0.7), 5.0),
                         SourceWorkload("b", 2, SensorModel("random_walk", step_sd=0.1), 2.0)), 4.0, 11)
    path = tmp_path / "trace.csv"
    assert export_trace(generate(spec), path) == 3 * 20 + 2 * 8
    assert list(replay(path)) == list(generate(spec))


def test_replay_two_rows(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("timestamp_ms,source_id,sensor_id,value\n0,s,t1,1.5\n10,s,t2,-2\n", encoding="utf-8")
    assert list(replay(path)) == [("s", Record(0, "t1", 1.5)), ("s", Record(10, "t2", -2.0))]


def test_replay_bad_value_names_the_line(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("timestamp_ms,source_id,sensor_id,value\n0,s,t1,1.5\n10,s,t2,hot\n", encoding="utf-8")
    with pytest.raises(FormatError) as err:
        list(replay(path))
    assert err.value.line == 3


def test_replay_bad_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("ts,source,sensor,value\n0,s,t1,1.5\n", encoding="utf-8")
    with pytest.raises(FormatError) as err:
        list(replay(path))
    assert err.value.line == 1


def test_replay_rejects_backwards_time(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("timestamp_ms,source_id,sensor_id,value\n10,s,t1,1\n20,r,t1,1\n5,s,t1,1\n", encoding="utf-8")
    with pytest.raises(OrderError):
        list(replay(path))


def test_parse_workload_document():
    spec = parse_workload({"seed": 3, "duration_s": 10, "sources": [
        {"source_id": "s", "sensor_count": 2, "rate": 5, "sensor_prefix": "plant",
         "model": {"kind": "sine_noise", "amplitude": 2, "period_s": 30}}]})
    assert spec.seed == 3
    assert spec.sources[0].sensor_ids() == ["plant-000", "plant-001"]
    assert spec.sources[0].model == SensorModel("sine_noise", amplitude=2.0, period_s=30.0)


def test_parse_workload_rejects_zero_period():
    with pytest.raises(FieldError) as err:
        parse_workload({"duration_s": 1, "sources": [
            {"source_id": "s", "sensor_count": 1, "rate": 1, "model": {"kind": "sine_noise", "period_s": 0}}]})
    assert err.value.path == "workload.sources[0].model.period_s"


def test_parse_workload_rejects_long_sensor_ids():
    with pytest.raises(FieldError):
        parse_workload({"duration_s": 1, "sources": [
            {"source_id": "s", "sensor_count": 1, "rate": 1, "sensor_prefix": "x" * 61,
             "model": {"kind": "constant"}}]})


def test_r2_workload_shape(r2_dir):
    import json
    spec = parse_workload(json.loads((r2_dir / "workload.json").read_text(encoding="utf-8")))
    head = list(itertools.islice(generate(spec), 40))
    assert len({r.sensor_id for _, r in head}) == 20
    assert all(len(r.sensor_id) == 50 for _, r in head)
