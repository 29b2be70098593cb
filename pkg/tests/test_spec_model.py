import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import component, make_spec, make_topology, cloud_site, site, sink, source, spec_doc, uplink
from edge_fabric.errors import FieldError, PreconditionError, SpecSyntaxError
from edge_fabric.model.spec_model import (
    BAD_DIRECTION, BAD_PIN, CYCLE, DANGLING_EDGE, DUP_ID, UNREACHABLE, parse_spec, serialize_spec,
    topological_order, validate,
)


def test_parse_minimal_document():
    spec = make_spec([source()], [component("a")], [sink()], [("s", "a"), ("a", "k")])
    assert (len(spec.sources), len(spec.components), len(spec.sinks), len(spec.edges)) == (1, 1, 1, 2)
    assert spec.component("a").selectivity == 1.0
    assert spec.edges == (("s", "a"), ("a", "k"))


def test_missing_selectivity_names_its_path():
    doc = spec_doc([source()], [component("a")], [sink()], [("s", "a"), ("a", "k")])
    del doc["components"][0]["selectivity"]
    with pytest.raises(FieldError) as err:
        parse_spec(json.dumps(doc))
    assert err.value.path == "components[0].selectivity"


def test_unknown_key_is_rejected():
    doc = spec_doc([source()], [], [sink()], [("s", "k")])
    doc["owner"] = "ops"
    with pytest.raises(FieldError) as err:
        parse_spec(json.dumps(doc))
    assert err.value.path == "owner"


def test_malformed_json_reports_position():
    with pytest.raises(SpecSyntaxError) as err:
        parse_spec('{\n  "name": "x",\n  "sources": [,]\n}')
    assert err.value.line == 3


def test_mistyped_edge():
    doc = spec_doc([source()], [], [sink()], [])
    doc["edges"] = [["s"]]
    with pytest.raises(FieldError) as err:
        parse_spec(json.dumps(doc))
    assert err.value.path == "edges[0]"


def test_r1_fixture_counts(r1_spec):
    assert len(r1_spec.components) == 4
    assert len(r1_spec.edges) == 6


def test_two_cycle_is_one_finding():
    spec = make_spec([source()], [component("a"), component("b")], [sink()],
                     [("s", "a"), ("a", "b"), ("b", "a"), ("b", "k")])
    report = validate(spec)
    cycles = [f for f in report.findings if f.code == CYCLE]
    assert len(cycles) == 1
    assert cycles[0].ids == ("a", "b")


def test_valid_pipeline_has_no_findings(pipeline_spec):
    report = validate(pipeline_spec)
    assert report.ok
    assert report.render() == "OK: no findings"


def test_component_without_sink_is_unreachable():
    spec = make_spec([source()], [component("a"), component("b")], [sink()],
                     [("s", "a"), ("a", "k"), ("s", "b")])
    report = validate(spec)
    assert report.codes() == [UNREACHABLE]
    assert report.findings[0].ids == ("b",)


def test_referential_findings_in_reporting_order():
    spec = make_spec([source(), source("s")], [component("a")], [sink()],
                     [("s", "a"), ("a", "k"), ("a", "ghost"), ("k", "a")])
    codes = validate(spec).codes()
    assert codes[0] == DUP_ID
    assert DANGLING_EDGE in codes
    assert BAD_DIRECTION in codes
    assert codes.index(DANGLING_EDGE) < codes.index(BAD_DIRECTION)


def test_site_references_checked_against_topology():
    topology = make_topology([cloud_site(), site("edge1")], [uplink("edge1")])
    spec = make_spec([source(site_id="cloud")], [component("a", pinned_site="edge9")], [sink(site_id="edge1")],
                     [("s", "a"), ("a", "k")])
    findings = validate(spec, topology).findings
    assert [f.code for f in findings] == [BAD_PIN, BAD_PIN, BAD_PIN]


def test_topological_order_chain():
    spec = make_spec([source()], [component("a")], [sink()], [("s", "a"), ("a", "k")])
    assert topological_order(spec) == ["s", "a", "k"]


def test_topological_order_diamond_breaks_ties_by_id():
    spec = make_spec([source()], [component("b"), component("a")], [sink()],
                     [("s", "a"), ("s", "b"), ("a", "k"), ("b", "k")])
    assert topological_order(spec) == ["s", "a", "b", "k"]


def test_r1_topological_order(r1_spec):
    assert topological_order(r1_spec) == ["sensors", "parse", "filter", "aggregate", "enrich", "feed", "store"]


def test_topological_order_rejects_cycles():
    spec = make_spec([source()], [component("a"), component("b")], [sink()],
                     [("s", "a"), ("a", "b"), ("b", "a"), ("b", "k")])
    with pytest.raises(PreconditionError):
        topological_order(spec)


NODES = ["s", "c0", "c1", "c2", "c3", "k"]


def _has_cycle(edges):
    graph = {n: [v for u, v in edges if u == n] for n in NODES}
    state = {n: 0 for n in NODES}

    def visit(n):
        state[n] = 1
        for m in graph[n]:
            if state[m] == 1 or (state[m] == 0 and visit(m)):
                return True
        state[n] = 2
        return False

    return any(state[n] == 0 and visit(n) for n in NODES)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(NODES[:5]), st.sampled_from(NODES[1:])), max_size=10, unique=True))
def test_cycle_findings_match_depth_first_search(edges):
    spec = make_spec([source()], [component(c) for c in NODES[1:5]], [sink()], edges)
    assert (CYCLE in validate(spec).codes()) == _has_cycle(edges)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(NODES[:5]), st.sampled_from(NODES[1:])), max_size=10, unique=True))
def test_topological_order_respects_every_edge(edges):
    spec = make_spec([source()], [component(c) for c in NODES[1:5]], [sink()], edges)
    if _has_cycle(edges):
        return
    order = topological_order(spec)
    assert sorted(order) == sorted(NODES)
    position = {n: i for i, n in enumerate(order)}
    assert all(position[u] < position[v] for u, v in edges)


finite = st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def chain_specs(draw):
    n = draw(st.integers(min_value=0, max_value=4))
    comps = [component(f"c{i}", cpu=draw(finite), mem=draw(finite), selectivity=draw(finite),
                       out_bytes=draw(finite), kind=draw(st.sampled_from(["stream_op", "ml_scorer", "aggregator"])),
                       pinned_site=draw(st.sampled_from([None, "edge1", "cloud"])))
             for i in range(n)]
    chain = ["s"] + [c["id"] for c in comps] + ["k"]
    src = source(rate=draw(finite), bytes_per_msg=draw(st.integers(min_value=1, max_value=10 ** 6)),
                 selector=draw(st.text(max_size=12)))
    return make_spec([src], comps, [sink(kind=draw(st.sampled_from(["storage", "pubsub"])))],
                     list(zip(chain, chain[1:])), name=draw(st.text(min_size=1, max_size=12)))


@settings(max_examples=100, deadline=None)
@given(chain_specs())
def test_serialize_then_parse_is_identity(spec):
    assert parse_spec(serialize_spec(spec)) == spec
