import json
from pathlib import Path

import pytest

from edge_fabric.model.spec_model import LogicalSpec, parse_spec
from edge_fabric.model.topology import Topology, parse_topology

FIXTURES = Path(__file__).parent / "fixtures"


def source(id="s", site_id="edge1", rate=10.0, bytes_per_msg=100, selector="grp"):
    return {"id": id, "selector": selector, "site_id": site_id, "rate": rate, "bytes_per_msg": bytes_per_msg}


def component(id, cpu=0.001, mem=64, selectivity=1.0, out_bytes=100, kind="stream_op", pinned_site=None):
    doc = {"id": id, "kind": kind, "cpu_units_per_msg": cpu, "mem_mb": mem, "selectivity": selectivity,
           "out_bytes_per_msg": out_bytes}
    if pinned_site is not None:
        doc["pinned_site"] = pinned_site
    return doc


def sink(id="k", kind="storage", site_id="cloud"):
    return {"id": id, "kind": kind, "site_id": site_id}


def spec_doc(sources, components, sinks, edges, name="test"):
    return {"name": name, "sources": sources, "components": components, "sinks": sinks,
            "edges": [list(e) for e in edges]}


def make_spec(sources, components, sinks, edges, name="test") -> LogicalSpec:
    return parse_spec(json.dumps(spec_doc(sources, components, sinks, edges, name)))


def site(id, site_type="edge", cpu=4.0, mem=2048, speed=1.0, pricing=None, effective=None):
    doc = {"id": id, "site_type": site_type, "cpu_units": cpu, "mem_mb": mem, "speed_factor": speed}
    if pricing is not None:
        doc["pricing"] = pricing
    if effective is not None:
        doc["effective_speed_factor"] = effective
    return doc


def cloud_site(pricing=None):
    return site("cloud", "cloud", cpu=1e6, mem=1e9, pricing=pricing)


def uplink(edge_id, schedule=((0, 5e6),), per_gb_cost=0.0):
    return {"from": edge_id, "to": "cloud", "bandwidth_schedule": [list(s) for s in schedule],
            "latency_ms": 10, "per_gb_cost": per_gb_cost}


def make_topology(sites, links, codec_cpu=None) -> Topology:
    doc = {"sites": sites, "links": links}
    if codec_cpu is not None:
        doc["codec_cpu"] = codec_cpu
    return parse_topology(json.dumps(doc))


@pytest.fixture
def r1_dir() -> Path:
    return FIXTURES / "r1"


@pytest.fixture
def r2_dir() -> Path:
    return FIXTURES / "r2"


@pytest.fixture
def r1_spec(r1_dir) -> LogicalSpec:
    return parse_spec((r1_dir / "spec.json").read_text(encoding="utf-8"))


@pytest.fixture
def r1_topology(r1_dir) -> Topology:
    return parse_topology((r1_dir / "topology.json").read_text(encoding="utf-8"))


@pytest.fixture
def pipeline_spec() -> LogicalSpec:
    """s -> a -> k with s on edge1."""
    return make_spec([source()], [component("a")], [sink()], [("s", "a"), ("a", "k")])


@pytest.fixture
def one_edge_topology() -> Topology:
    return make_topology([cloud_site(), site("edge1")], [uplink("edge1")])
