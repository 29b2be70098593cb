# src/edge_fabric/fabric/compiler.py
"""
Compile a logical spec plus a placement into a physical plan.

Every DAG edge whose endpoints sit on different sites becomes an uplink channel with an
encoder at the sending site and a decoder at the receiving site. Plans are immutable:
apply_move and the shadow operations return new plans.
"""
import logging
from typing import Dict, Mapping, Sequence

from edge_fabric.codecs.types import JSON, CodecId
from edge_fabric.errors import CapacityError, FieldError, PlacementError, ShadowExists
from edge_fabric.fabric.plan import (
    DECODER, ENCODER, LOCAL, UPLINK, Channel, CodecComponent, PhysicalPlan, Placement,
    ShadowReplica, edge_label,
)
from edge_fabric.model.document import dump_document, load_document
from edge_fabric.model.spec_model import LogicalSpec
from edge_fabric.model.topology import Topology

logger = logging.getLogger("edge_fabric.fabric")


def _check_placement(spec: LogicalSpec, topology: Topology, placement: Placement) -> None:
    mapping = placement.as_dict()
    cloud_id = topology.cloud.id
    declared = set(spec.all_ids())
    for node in mapping:
        if node not in declared:
            raise PlacementError(f"placement names unknown node {node}")
    for node in spec.all_ids():
        if node not in mapping:
            raise PlacementError(f"{node} has no site in the placement")
        if not topology.has_site(mapping[node]):
            raise PlacementError(f"{node} placed on unknown site {mapping[node]}")
    for s in spec.sources:
        if mapping[s.id] != s.site_id:
            raise PlacementError(f"source {s.id} must stay at {s.site_id}, placed on {mapping[s.id]}")
        if not topology.site(s.site_id).is_edge:
            raise PlacementError(f"source {s.id} attaches to non-edge site {s.site_id}")
    for k in spec.sinks:
        if mapping[k.id] != cloud_id:
            raise PlacementError(f"sink {k.id} must be at the cloud site {cloud_id}")
    for c in spec.components:
        if c.pinned_site is not None and mapping[c.id] != c.pinned_site:
            raise PlacementError(f"component {c.id} is pinned to {c.pinned_site}, placed on {mapping[c.id]}")


def static_memory(spec: LogicalSpec, placement: Placement,
                  shadows: Sequence[ShadowReplica] = ()) -> Dict[str, float]:
    """Resident MiB per site for placed components and shadow replicas."""
    used: Dict[str, float] = {}
    for c in spec.components:
        site = placement.site_of(c.id)
        used[site] = used.get(site, 0.0) + c.mem_mb
    for sh in shadows:
        used[sh.site_id] = used.get(sh.site_id, 0.0) + spec.component(sh.component).mem_mb
    return used


def _check_memory(spec: LogicalSpec, topology: Topology, placement: Placement,
                  shadows: Sequence[ShadowReplica]) -> None:
    for site_id, mem in sorted(static_memory(spec, placement, shadows).items()):
        site = topology.site(site_id)
        if mem > site.mem_mb:
            raise CapacityError(f"site {site_id} needs {mem:g} MiB but has {site.mem_mb:g} MiB")


def compile(spec: LogicalSpec, topology: Topology, placement: Placement,
            default_codec: CodecId = JSON, shadows: Sequence[ShadowReplica] = (),
            check_capacity: bool = True) -> PhysicalPlan:
    """
    Bind a spec to sites.

    Args:
        spec: validated logical spec
        topology: sites and links to deploy onto
        placement: site of every source, component and sink
        default_codec: codec the injected encoders/decoders are costed with
        shadows: shadow replicas to carry into the plan
        check_capacity: raise CapacityError when static memory overflows a site

    Returns:
        PhysicalPlan with one encoder/decoder pair per cross-site edge
    """
    _check_placement(spec, topology, placement)
    if check_capacity:
        _check_memory(spec, topology, placement, shadows)

    enc_cost = topology.codec_cpu.encoder_cost(default_codec.base, default_codec.deflate)
    dec_cost = topology.codec_cpu.decoder_cost(default_codec.base, default_codec.deflate)
    channels = []
    injected = []
    for edge in sorted(set(spec.edges)):
        u, v = edge
        su, sv = placement.site_of(u), placement.site_of(v)
        if su == sv:
            channels.append(Channel(edge, LOCAL, su, sv))
            continue
        label = edge_label(edge)
        enc = CodecComponent(f"enc:{label}", su, enc_cost, ENCODER, edge)
        dec = CodecComponent(f"dec:{label}", sv, dec_cost, DECODER, edge)
        links = tuple(ln.link_id for ln in topology.route(su, sv))
        channels.append(Channel(edge, UPLINK, su, sv, links, f"ctl:{label}", enc.id, dec.id))
        injected.extend([enc, dec])

    plan = PhysicalPlan(spec, topology, placement, tuple(channels),
                        tuple(sorted(injected, key=lambda c: c.id)),
                        tuple(sorted(shadows, key=lambda s: s.component)), default_codec)
    logger.debug(f"Compiled {spec.name}: {len(plan.uplinks())} uplink(s), {len(injected)} injected")
    return plan


def _check_movable(plan: PhysicalPlan, component: str, target: str) -> None:
    role = plan.spec.role_of(component)
    if role is None:
        raise PlacementError(f"unknown component {component}")
    if role != "component":
        raise PlacementError(f"{role} {component} cannot move")
    pin = plan.spec.component(component).pinned_site
    if pin is not None:
        raise PlacementError(f"component {component} is pinned to {pin}")
    if not plan.topology.has_site(target):
        raise PlacementError(f"unknown site {target}")


def apply_move(plan: PhysicalPlan, component: str, target: str, check_capacity: bool = True) -> PhysicalPlan:
    """Recompile with `component` on `target`; moving to the current site returns the plan itself."""
    _check_movable(plan, component, target)
    if plan.site_of(component) == target:
        return plan
    return compile(plan.spec, plan.topology, plan.placement.with_site(component, target),
                   plan.default_codec, plan.shadows, check_capacity)


def add_shadow(plan: PhysicalPlan, component: str, target: str, check_capacity: bool = True) -> PhysicalPlan:
    _check_movable(plan, component, target)
    if plan.shadow_of(component) is not None:
        raise ShadowExists(f"component {component} already has a shadow")
    shadows = tuple(plan.shadows) + (ShadowReplica(component, target),)
    if check_capacity:
        _check_memory(plan.spec, plan.topology, plan.placement, shadows)
    logger.info(f"Shadowing {component} on {target}")
    return compile(plan.spec, plan.topology, plan.placement, plan.default_codec, shadows, check_capacity=False)


def remove_shadow(plan: PhysicalPlan, component: str) -> PhysicalPlan:
    if plan.shadow_of(component) is None:
        raise PlacementError(f"component {component} has no shadow")
    shadows = tuple(s for s in plan.shadows if s.component != component)
    return compile(plan.spec, plan.topology, plan.placement, plan.default_codec, shadows, check_capacity=False)


def placement_from_components(spec: LogicalSpec, topology: Topology,
                              component_sites: Mapping[str, str]) -> Placement:
    """Complete a component->site mapping with source sites, the cloud for sinks, and pins."""
    mapping: Dict[str, str] = {}
    for s in spec.sources:
        mapping[s.id] = s.site_id
    for k in spec.sinks:
        mapping[k.id] = topology.cloud.id
    for c in spec.components:
        if c.id in component_sites:
            mapping[c.id] = component_sites[c.id]
        elif c.pinned_site is not None:
            mapping[c.id] = c.pinned_site
        else:
            raise PlacementError(f"component {c.id} has no site in the placement")
    for node in component_sites:
        if spec.role_of(node) != "component":
            raise PlacementError(f"placement entry {node} is not a component")
    return Placement.from_mapping(mapping)


def parse_placement(text: str, spec: LogicalSpec, topology: Topology) -> Placement:
    doc = load_document(text)
    if not isinstance(doc, dict):
        raise FieldError("<root>", "expected an object mapping component id to site id")
    for key, value in doc.items():
        if not isinstance(value, str):
            raise FieldError(key, "expected a site id string")
    return placement_from_components(spec, topology, doc)


def serialize_placement(placement: Placement, spec: LogicalSpec) -> str:
    component_ids = {c.id for c in spec.components}
    return dump_document({node: site for node, site in placement.assignments if node in component_ids})
