from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from edge_fabric import codecs
from edge_fabric.codecs.formats import json_size
from edge_fabric.codecs.types import BINPACK, DELTA, DELTA_DEFLATE, JSON, JSON_DEFLATE, Batch
from edge_fabric.control.comm_optimizer import (
    BUDGET_BURST_S, WINDOW_LADDER, dollar_rate, enqueue_and_cut_batches, new_controller, observe_encoding,
    pop_backlog, prior_ratios, push_backlog, replace_backlog, tick,
)
from edge_fabric.model.workload import Record


def _arrivals(n, start_ms=0, step_ms=10, source_id="src"):
    return [(source_id, Record(start_ms + i * step_ms, "s-000", float(i))) for i in range(n)]


def _encoded(n=20):
    return codecs.encode(JSON, Batch(tuple(r for _, r in _arrivals(n)), "src"))


def test_prior_ratios():
    priors = prior_ratios()
    assert priors[JSON] == 1.0
    assert priors[JSON_DEFLATE] == pytest.approx(0.6)
    assert priors[BINPACK] == 0.45
    assert priors[DELTA_DEFLATE] == pytest.approx(0.18)
    assert len(priors) == 6


def test_first_observation_replaces_the_prior():
    state = observe_encoding(new_controller("c"), BINPACK, 1000, 300)
    assert state.ratio_estimates[BINPACK] == 0.3
    assert BINPACK not in state.sentinel
    state = observe_encoding(state, BINPACK, 1000, 500)
    assert state.ratio_estimates[BINPACK] == pytest.approx(0.7 * 0.3 + 0.3 * 0.5)


def test_empty_observation_is_ignored():
    state = new_controller("c")
    assert observe_encoding(state, BINPACK, 0, 0) is state


@settings(max_examples=100)
@given(st.floats(min_value=0.01, max_value=2.0), st.floats(min_value=0.01, max_value=2.0),
       st.floats(min_value=0.05, max_value=1.0))
def test_estimates_converge_to_a_steady_ratio(first, steady, alpha):
    state = observe_encoding(new_controller("c", ewma_alpha=alpha), BINPACK, 10_000, round(first * 10_000))
    start = state.ratio_estimates[BINPACK]
    target = round(steady * 10_000) / 10_000
    for k in range(1, 40):
        state = observe_encoding(state, BINPACK, 10_000, round(steady * 10_000))
        assert abs(state.ratio_estimates[BINPACK] - target) <= (1 - alpha) ** k * abs(start - target) + 1e-12


def test_zero_cost_link_prefers_the_cheapest_encoder():
    _, decision = tick(new_controller("c"), 1e9, _arrivals(100), edge_cpu_headroom=10.0)
    assert decision.codec == JSON
    assert decision.batch_window_s == 1
    assert not decision.drain


def test_priced_link_prefers_the_densest_codec():
    _, decision = tick(new_controller("c", per_gb_cost=0.08), 1e9, _arrivals(100), edge_cpu_headroom=10.0)
    assert decision.codec == DELTA_DEFLATE


def test_cpu_headroom_rules_out_expensive_codecs():
    _, decision = tick(new_controller("c", per_gb_cost=0.08), 1e9, _arrivals(100), edge_cpu_headroom=0.02)
    assert decision.codec == DELTA


def test_congestion_escalates_the_window():
    state, decision = tick(new_controller("c"), 1000, _arrivals(100), edge_cpu_headroom=10.0)
    assert decision.codec == DELTA_DEFLATE
    assert decision.batch_window_s == WINDOW_LADDER[1]
    state, decision = tick(state, 1000, _arrivals(100, start_ms=1000), edge_cpu_headroom=10.0)
    assert decision.batch_window_s == WINDOW_LADDER[2]


def test_congestion_without_cpu_falls_back_to_the_cheapest_encoder():
    _, decision = tick(new_controller("c"), 1000, _arrivals(100), edge_cpu_headroom=0.0)
    assert decision.codec == JSON
    assert decision.batch_window_s == 2


def test_window_is_capped_at_the_top_of_the_ladder():
    state = replace(new_controller("c"), batch_window_s=WINDOW_LADDER[-1])
    _, decision = tick(state, 1000, _arrivals(100), edge_cpu_headroom=10.0)
    assert decision.batch_window_s == WINDOW_LADDER[-1]


def test_window_steps_down_after_two_comfortable_intervals():
    state = replace(new_controller("c"), batch_window_s=5)
    state, decision = tick(state, 1e9, _arrivals(10), edge_cpu_headroom=10.0)
    assert decision.batch_window_s == 5
    state, decision = tick(state, 1e9, _arrivals(10), edge_cpu_headroom=10.0)
    assert decision.batch_window_s == 2
    assert state.comfortable_intervals == 0


def test_decision_follows_a_cap_drop_in_one_interval():
    state, before = tick(new_controller("c"), 5e6, _arrivals(100), edge_cpu_headroom=10.0)
    _, after = tick(state, 1000, _arrivals(100, start_ms=1000), edge_cpu_headroom=10.0)
    assert (before.codec, before.batch_window_s) != (after.codec, after.batch_window_s)


def test_budget_without_backlog():
    records = _arrivals(100)
    raw = json_size([r for _, r in records])
    _, decision = tick(new_controller("c"), 1e9, records, edge_cpu_headroom=10.0)
    assert decision.estimated_rate_bits == 8 * raw
    assert decision.send_budget_bits == pytest.approx(8 * raw + BUDGET_BURST_S * 1e9)


def test_backlog_drains_at_full_cap():
    state = push_backlog(new_controller("c"), [_encoded()])
    state, decision = tick(state, 1e6, [], edge_cpu_headroom=10.0)
    assert decision.drain and state.drain
    assert decision.send_budget_bits == pytest.approx(1e6 + BUDGET_BURST_S * 1e6)


def test_fixed_codec_when_not_adaptive():
    state = new_controller("c", default_codec=BINPACK, adaptive=False)
    _, decision = tick(state, 10, _arrivals(100), edge_cpu_headroom=0.0)
    assert decision.codec == BINPACK
    assert decision.batch_window_s == 1


def test_cut_at_the_window_boundary():
    state = replace(new_controller("c"), batch_window_s=5)
    records = _arrivals(600, step_ms=10)
    state, _ = tick(state, 1e9, records, edge_cpu_headroom=10.0)
    assert state.pending_bytes == json_size([r for _, r in records])
    held, batches = enqueue_and_cut_batches(state, 4.0)
    assert batches == [] and held is state
    state, batches = enqueue_and_cut_batches(state, 5.0)
    assert [len(b) for b in batches] == [500]
    assert batches[0].records[-1].timestamp_ms == 4990
    assert state.pending_count == 100
    assert state.pending_bytes == json_size([r for _, r in records[500:]])


def test_cut_groups_by_source_and_slot():
    state = new_controller("c")
    arrived = _arrivals(3, source_id="b") + _arrivals(2, start_ms=1000, source_id="a") + _arrivals(2, source_id="a")
    state, _ = tick(state, 1e9, arrived, edge_cpu_headroom=10.0)
    state, batches = enqueue_and_cut_batches(state, 2.0)
    assert [(b.source_id, len(b)) for b in batches] == [("a", 2), ("b", 3), ("a", 2)]
    assert state.pending == () and state.pending_bytes == 0


def test_backlog_bookkeeping():
    first, second = _encoded(5), _encoded(9)
    state = push_backlog(new_controller("c"), [first, second])
    assert state.backlog_bytes == first.size + second.size
    state, head = pop_backlog(state)
    assert head == first
    assert state.backlog_bytes == second.size
    state = replace_backlog(state, [])
    assert state.backlog_bytes == 0
    assert state.buffered_bytes == state.pending_bytes


def test_dollar_rate():
    one_gib_per_hour = 2 ** 30 * 8 / 3600
    assert dollar_rate(one_gib_per_hour, 0.08) == pytest.approx(0.08)
    assert dollar_rate(one_gib_per_hour, 0.0) == 0.0


def test_invalid_alpha():
    with pytest.raises(ValueError):
        new_controller("c", ewma_alpha=0.0)
