# src/edge_fabric/fabric/plan.py
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from edge_fabric.codecs.types import JSON, CodecId
from edge_fabric.model.spec_model import LogicalSpec
from edge_fabric.model.topology import Topology

LOCAL = "local"
UPLINK = "uplink"
ENCODER = "encoder"
DECODER = "decoder"


def edge_label(edge: Tuple[str, str]) -> str:
    return f"{edge[0]}->{edge[1]}"


@dataclass(frozen=True)
class Placement:
    """Site of every node in a spec (sources, components and sinks), kept sorted by id."""
    assignments: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "Placement":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> Dict[str, str]:
        return dict(self.assignments)

    def site_of(self, node_id: str) -> str:
        for node, site in self.assignments:
            if node == node_id:
                return site
        raise KeyError(node_id)

    def with_site(self, node_id: str, site_id: str) -> "Placement":
        mapping = self.as_dict()
        mapping[node_id] = site_id
        return Placement.from_mapping(mapping)

    def nodes_at(self, site_id: str) -> List[str]:
        return [node for node, site in self.assignments if site == site_id]


@dataclass(frozen=True)
class CodecComponent:
    id: str
    site_id: str
    cpu_units_per_msg: float
    role: str
    edge: Tuple[str, str]


@dataclass(frozen=True)
class Channel:
    edge: Tuple[str, str]
    kind: str
    from_site: str
    to_site: str
    # Link ids in hop order; empty for local channels.
    links: Tuple[str, ...] = ()
    controller_id: Optional[str] = None
    encoder_id: Optional[str] = None
    decoder_id: Optional[str] = None

    @property
    def id(self) -> str:
        return edge_label(self.edge)

    @property
    def is_uplink(self) -> bool:
        return self.kind == UPLINK

    @property
    def first_link(self) -> Optional[str]:
        return self.links[0] if self.links else None


@dataclass(frozen=True)
class ShadowReplica:
    """Metered copy of a component fed by a duplicate of its input; its output goes nowhere."""
    component: str
    site_id: str

    @property
    def id(self) -> str:
        return f"shadow:{self.component}"


@dataclass(frozen=True)
class PhysicalPlan:
    spec: LogicalSpec
    topology: Topology
    placement: Placement
    channels: Tuple[Channel, ...]
    injected: Tuple[CodecComponent, ...]
    shadows: Tuple[ShadowReplica, ...] = ()
    default_codec: CodecId = field(default=JSON)

    def site_of(self, node_id: str) -> str:
        return self.placement.site_of(node_id)

    def channel(self, edge: Tuple[str, str]) -> Channel:
        for ch in self.channels:
            if ch.edge == tuple(edge):
                return ch
        raise KeyError(edge_label(edge))

    def uplinks(self) -> List[Channel]:
        return [ch for ch in self.channels if ch.is_uplink]

    def codec_component(self, component_id: str) -> CodecComponent:
        return next(c for c in self.injected if c.id == component_id)

    def shadow_of(self, component: str) -> Optional[ShadowReplica]:
        return next((s for s in self.shadows if s.component == component), None)

    def components_at(self, site_id: str) -> List[str]:
        ids = {c.id for c in self.spec.components}
        return [n for n in self.placement.nodes_at(site_id) if n in ids]

    def injected_at(self, site_id: str) -> List[CodecComponent]:
        return [c for c in self.injected if c.site_id == site_id]

    def channels_over(self, link_id: str) -> List[Channel]:
        return [ch for ch in self.channels if link_id in ch.links]

    def link_ids(self) -> List[str]:
        seen = []
        for ch in self.channels:
            for ln in ch.links:
                if ln not in seen:
                    seen.append(ln)
        return sorted(seen)


def encoders(injected: Iterable[CodecComponent]) -> List[CodecComponent]:
    return [c for c in injected if c.role == ENCODER]


def decoders(injected: Iterable[CodecComponent]) -> List[CodecComponent]:
    return [c for c in injected if c.role == DECODER]
