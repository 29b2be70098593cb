import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import cloud_site, make_topology, site, uplink
from edge_fabric.errors import FieldError, InvariantError
from edge_fabric.model.topology import (
    BandwidthSchedule, LinkSpec, Site, bandwidth_at, edge_headroom, parse_topology, serialize_topology,
)


def _link(steps):
    return LinkSpec("edge1", "cloud", BandwidthSchedule(tuple(steps)))


def test_one_edge_one_cloud(one_edge_topology):
    assert len(one_edge_topology.sites) == 2
    assert len(one_edge_topology.links) == 1
    assert one_edge_topology.cloud.id == "cloud"
    assert [s.id for s in one_edge_topology.edge_sites()] == ["edge1"]


def test_no_cloud_site():
    with pytest.raises(InvariantError) as err:
        make_topology([site("edge1")], [])
    assert err.value.code == "NO_CLOUD"


def test_two_cloud_sites():
    with pytest.raises(InvariantError) as err:
        make_topology([cloud_site(), site("cloud2", "cloud", cpu=1e6)], [])
    assert err.value.code == "MULTIPLE_CLOUD"


def test_edge_without_uplink():
    with pytest.raises(InvariantError) as err:
        make_topology([cloud_site(), site("edge1"), site("edge2")], [uplink("edge1")])
    assert err.value.code == "MISSING_UPLINK"


def test_schedule_must_start_at_zero():
    with pytest.raises(InvariantError) as err:
        make_topology([cloud_site(), site("edge1")], [uplink("edge1", schedule=((5, 1e6),))])
    assert err.value.code == "BAD_SCHEDULE"


def test_schedule_starts_strictly_increase():
    with pytest.raises(InvariantError):
        make_topology([cloud_site(), site("edge1")], [uplink("edge1", schedule=((0, 1e6), (10, 2e6), (10, 3e6)))])


def test_zero_cap_is_rejected():
    with pytest.raises(InvariantError):
        make_topology([cloud_site(), site("edge1")], [uplink("edge1", schedule=((0, 1e6), (10, 0)))])


def test_nonpositive_speed_factor():
    with pytest.raises(InvariantError) as err:
        make_topology([cloud_site(), site("edge1", speed=0)], [uplink("edge1")])
    assert err.value.code == "BAD_CAPACITY"


def test_unknown_site_field():
    doc = {"sites": [cloud_site(), dict(site("edge1"), gpu=1)], "links": [uplink("edge1")]}
    with pytest.raises(FieldError) as err:
        parse_topology(json.dumps(doc))
    assert err.value.path == "sites[1].gpu"


def test_r1_fixture(r1_topology):
    assert len(r1_topology.sites) == 4
    assert len(r1_topology.links) == 3
    assert r1_topology.site("edge1").speed_factor == 0.5
    unit = r1_topology.cloud.pricing.provisioned_unit
    assert (unit.unit_name, unit.units, unit.per_unit_hour) == ("SU", 1, 0.05)


def test_codec_cpu_override():
    topology = make_topology([cloud_site(), site("edge1")], [uplink("edge1")],
                             codec_cpu={"delta": 0.001, "decoder_factor": 0.5})
    assert topology.codec_cpu.encoder_cost("delta", True) == pytest.approx(0.0013)
    assert topology.codec_cpu.decoder_cost("delta", False) == pytest.approx(0.0005)
    assert topology.codec_cpu.json == 0.00002


def test_route_between_edges_goes_through_cloud():
    topology = make_topology([cloud_site(), site("edge1"), site("edge2")],
                             [uplink("edge1", per_gb_cost=0.1), uplink("edge2", per_gb_cost=0.2)])
    hops = topology.route("edge1", "edge2")
    assert [h.link_id for h in hops] == ["edge1->cloud", "cloud->edge2"]
    assert hops[1].per_gb_cost == 0.2
    assert topology.route("edge1", "edge1") == ()


def test_bandwidth_single_step():
    assert bandwidth_at(_link([(0, 5e6)]), 100) == 5e6


def test_bandwidth_boundary_is_right_continuous():
    link = _link([(0, 5e6), (300, 2.5e5)])
    assert bandwidth_at(link, 300) == 2.5e5
    assert bandwidth_at(link, 299.9) == 5e6


@settings(max_examples=200)
@given(st.lists(st.floats(min_value=0.001, max_value=1000), min_size=1, max_size=6),
       st.lists(st.floats(min_value=1, max_value=1e9), min_size=7, max_size=7),
       st.floats(min_value=0, max_value=8000))
def test_bandwidth_matches_linear_scan(gaps, caps, t):
    starts = [0.0]
    for gap in gaps:
        starts.append(starts[-1] + gap)
    steps = list(zip(starts, caps))
    expected = steps[0][1]
    for start, cap in steps:
        if start <= t:
            expected = cap
    assert bandwidth_at(_link(steps), t) == expected


@pytest.mark.parametrize("used, expected", [
    ((1.0, 512), (3.0, 1536)),
    ((5.0, 4096), (0.0, 0.0)),
    ((4.0, 2048), (0.0, 0.0)),
])
def test_edge_headroom(used, expected):
    edge = Site("edge1", "edge", 4.0, 2048, 1.0)
    assert edge_headroom(edge, *used) == expected


def test_serialize_then_parse_is_identity(r1_topology):
    assert parse_topology(serialize_topology(r1_topology)) == r1_topology
