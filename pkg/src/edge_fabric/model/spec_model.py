# src/edge_fabric/model/spec_model.py
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, TYPE_CHECKING

import networkx as nx

from edge_fabric.errors import FieldError, PreconditionError
from edge_fabric.model.document import (
    child, dump_document, expect_object, get_enum, get_int, get_list, get_number, get_str,
    load_document,
)

if TYPE_CHECKING:
    from edge_fabric.model.topology import Topology

logger = logging.getLogger("edge_fabric.spec_model")

COMPONENT_KINDS = ("stream_op", "ml_scorer", "aggregator")
SINK_KINDS = ("storage", "pubsub")

# Finding codes, in reporting order
CYCLE = "CYCLE"
DANGLING_EDGE = "DANGLING_EDGE"
DUP_ID = "DUP_ID"
UNREACHABLE = "UNREACHABLE"
BAD_PIN = "BAD_PIN"
BAD_DIRECTION = "BAD_DIRECTION"
FINDING_ORDER = (DUP_ID, DANGLING_EDGE, BAD_DIRECTION, CYCLE, UNREACHABLE, BAD_PIN)


@dataclass(frozen=True)
class SourceDecl:
    id: str
    selector: str
    site_id: str
    rate: float
    bytes_per_msg: int


@dataclass(frozen=True)
class ComponentDecl:
    id: str
    kind: str
    cpu_units_per_msg: float
    mem_mb: float
    selectivity: float
    out_bytes_per_msg: float
    pinned_site: Optional[str] = None


@dataclass(frozen=True)
class SinkDecl:
    id: str
    kind: str
    site_id: str


@dataclass(frozen=True)
class LogicalSpec:
    """The application DAG: sources feed components, components feed sinks."""
    name: str
    sources: Tuple[SourceDecl, ...]
    components: Tuple[ComponentDecl, ...]
    sinks: Tuple[SinkDecl, ...]
    edges: Tuple[Tuple[str, str], ...]

    def all_ids(self) -> List[str]:
        return ([s.id for s in self.sources] + [c.id for c in self.components]
                + [k.id for k in self.sinks])

    def role_of(self, node_id: str) -> Optional[str]:
        """Return "source", "component" or "sink" (None when undeclared)."""
        if any(s.id == node_id for s in self.sources):
            return "source"
        if any(c.id == node_id for c in self.components):
            return "component"
        if any(k.id == node_id for k in self.sinks):
            return "sink"
        return None

    def source(self, node_id: str) -> SourceDecl:
        return next(s for s in self.sources if s.id == node_id)

    def component(self, node_id: str) -> ComponentDecl:
        return next(c for c in self.components if c.id == node_id)

    def sink(self, node_id: str) -> SinkDecl:
        return next(k for k in self.sinks if k.id == node_id)

    def successors(self, node_id: str) -> List[str]:
        return sorted(v for u, v in self.edges if u == node_id)

    def predecessors(self, node_id: str) -> List[str]:
        return sorted(u for u, v in self.edges if v == node_id)


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    ids: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    findings: Tuple[Finding, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.findings

    def codes(self) -> List[str]:
        return [f.code for f in self.findings]

    def render(self) -> str:
        if self.ok:
            return "OK: no findings"
        return "\n".join(f"{f.code}: {f.message} [{', '.join(f.ids)}]" for f in self.findings)


def parse_spec(text: str) -> LogicalSpec:
    """
    Parse a spec document into a LogicalSpec.

    Only syntax and field types are checked here; structural rules are left to validate().

    Args:
        text: JSON document with keys name, sources, components, sinks, edges

    Returns:
        LogicalSpec mirroring the document
    """
    doc = expect_object(load_document(text), "", ("name", "sources", "components", "sinks", "edges"))
    name = get_str(doc, "name", "")

    sources = []
    for i, raw in enumerate(get_list(doc, "sources", "")):
        path = child("sources", i)
        expect_object(raw, path, ("id", "selector", "site_id", "rate", "bytes_per_msg"))
        sources.append(SourceDecl(
            id=get_str(raw, "id", path),
            selector=get_str(raw, "selector", path),
            site_id=get_str(raw, "site_id", path),
            rate=get_number(raw, "rate", path, minimum=0),
            bytes_per_msg=get_int(raw, "bytes_per_msg", path, minimum=1),
        ))

    components = []
    for i, raw in enumerate(get_list(doc, "components", "")):
        path = child("components", i)
        expect_object(raw, path,
                      ("id", "kind", "cpu_units_per_msg", "mem_mb", "selectivity", "out_bytes_per_msg"),
                      ("pinned_site",))
        components.append(ComponentDecl(
            id=get_str(raw, "id", path),
            kind=get_enum(raw, "kind", path, COMPONENT_KINDS),
            cpu_units_per_msg=get_number(raw, "cpu_units_per_msg", path, minimum=0),
            mem_mb=get_number(raw, "mem_mb", path, minimum=0),
            selectivity=get_number(raw, "selectivity", path, minimum=0),
            out_bytes_per_msg=get_number(raw, "out_bytes_per_msg", path, minimum=0),
            pinned_site=get_str(raw, "pinned_site", path, allow_none=True),
        ))

    sinks = []
    for i, raw in enumerate(get_list(doc, "sinks", "")):
        path = child("sinks", i)
        expect_object(raw, path, ("id", "kind", "site_id"))
        sinks.append(SinkDecl(
            id=get_str(raw, "id", path),
            kind=get_enum(raw, "kind", path, SINK_KINDS),
            site_id=get_str(raw, "site_id", path),
        ))

    edges = []
    for i, raw in enumerate(get_list(doc, "edges", "")):
        path = child("edges", i)
        if (not isinstance(raw, list) or len(raw) != 2
                or not all(isinstance(end, str) for end in raw)):
            raise FieldError(path, "expected a [from, to] pair of id strings")
        edges.append((raw[0], raw[1]))

    spec = LogicalSpec(name, tuple(sources), tuple(components), tuple(sinks), tuple(edges))
    logger.debug(f"Parsed spec {name}: {len(sources)} sources, {len(components)} components, "
                 f"{len(sinks)} sinks, {len(edges)} edges")
    return spec


def spec_to_dict(spec: LogicalSpec) -> Dict:
    components = []
    for c in spec.components:
        entry = {
            "id": c.id, "kind": c.kind, "cpu_units_per_msg": c.cpu_units_per_msg,
            "mem_mb": c.mem_mb, "selectivity": c.selectivity,
            "out_bytes_per_msg": c.out_bytes_per_msg,
        }
        if c.pinned_site is not None:
            entry["pinned_site"] = c.pinned_site
        components.append(entry)
    return {
        "name": spec.name,
        "sources": [{"id": s.id, "selector": s.selector, "site_id": s.site_id,
                     "rate": s.rate, "bytes_per_msg": s.bytes_per_msg} for s in spec.sources],
        "components": components,
        "sinks": [{"id": k.id, "kind": k.kind, "site_id": k.site_id} for k in spec.sinks],
        "edges": [[u, v] for u, v in spec.edges],
    }


def serialize_spec(spec: LogicalSpec) -> str:
    return dump_document(spec_to_dict(spec))


def to_digraph(spec: LogicalSpec) -> nx.DiGraph:
    """All declared ids as nodes plus every edge whose endpoints are declared."""
    graph = nx.DiGraph()
    declared = set(spec.all_ids())
    graph.add_nodes_from(declared)
    graph.add_edges_from((u, v) for u, v in spec.edges if u in declared and v in declared)
    return graph


def _cycle_findings(graph: nx.DiGraph) -> List[Finding]:
    findings = []
    for scc in nx.strongly_connected_components(graph):
        members = sorted(scc)
        if len(members) > 1 or graph.has_edge(members[0], members[0]):
            findings.append(Finding(CYCLE, f"cycle through {' -> '.join(members)}", tuple(members)))
    return sorted(findings, key=lambda f: f.ids)


def validate(spec: LogicalSpec, topology: Optional["Topology"] = None) -> ValidationReport:
    """
    Check every LogicalSpec invariant and report violations as findings.

    Args:
        spec: the parsed spec
        topology: when given, site references are resolved against it as well

    Returns:
        ValidationReport, empty iff the spec is a well-formed DAG
    """
    findings: List[Finding] = []

    seen: Dict[str, int] = {}
    for node_id in spec.all_ids():
        seen[node_id] = seen.get(node_id, 0) + 1
    for node_id in sorted(k for k, n in seen.items() if n > 1):
        findings.append(Finding(DUP_ID, f"id {node_id} declared {seen[node_id]} times", (node_id,)))

    for u, v in spec.edges:
        missing = [end for end in (u, v) if end not in seen]
        if missing:
            findings.append(Finding(DANGLING_EDGE, f"edge ({u}, {v}) names undeclared {', '.join(missing)}",
                                    (u, v)))

    for u, v in spec.edges:
        if spec.role_of(v) == "source":
            findings.append(Finding(BAD_DIRECTION, f"source {v} has an in-edge from {u}", (u, v)))
        if spec.role_of(u) == "sink":
            findings.append(Finding(BAD_DIRECTION, f"sink {u} has an out-edge to {v}", (u, v)))

    graph = to_digraph(spec)
    findings.extend(_cycle_findings(graph))

    source_ids = {s.id for s in spec.sources}
    sink_ids = {k.id for k in spec.sinks}
    fed = set()
    for s in source_ids:
        fed |= nx.descendants(graph, s)
    drained = set()
    for k in sink_ids:
        drained |= nx.ancestors(graph, k)
    for c in sorted(c.id for c in spec.components):
        if c not in fed:
            findings.append(Finding(UNREACHABLE, f"component {c} is not reachable from any source", (c,)))
        elif c not in drained:
            findings.append(Finding(UNREACHABLE, f"component {c} does not reach any sink", (c,)))

    for c in spec.components:
        if c.pinned_site is not None and c.pinned_site == "":
            findings.append(Finding(BAD_PIN, f"component {c.id} has an empty pinned_site", (c.id,)))
    if topology is not None:
        site_types = {s.id: s.site_type for s in topology.sites}
        for c in spec.components:
            if c.pinned_site and c.pinned_site not in site_types:
                findings.append(Finding(BAD_PIN, f"component {c.id} pinned to unknown site {c.pinned_site}",
                                        (c.id, c.pinned_site)))
        for s in spec.sources:
            if site_types.get(s.site_id) != "edge":
                findings.append(Finding(BAD_PIN, f"source {s.id} must attach to an edge site, got {s.site_id}",
                                        (s.id, s.site_id)))
        for k in spec.sinks:
            if site_types.get(k.site_id) != "cloud":
                findings.append(Finding(BAD_PIN, f"sink {k.id} must be at the cloud site, got {k.site_id}",
                                        (k.id, k.site_id)))

    rank = {code: i for i, code in enumerate(FINDING_ORDER)}
    findings.sort(key=lambda f: rank[f.code])
    if findings:
        logger.info(f"Spec {spec.name} has {len(findings)} finding(s)")
    return ValidationReport(tuple(findings))


def topological_order(spec: LogicalSpec) -> List[str]:
    """Order all ids so every edge points forward; ties go to the lexicographically smaller id."""
    declared = set(spec.all_ids())
    for u, v in spec.edges:
        if u not in declared or v not in declared:
            raise PreconditionError(f"edge ({u}, {v}) names an undeclared id")
    graph = to_digraph(spec)
    try:
        return list(nx.lexicographical_topological_sort(graph))
    except nx.NetworkXUnfeasible:
        cycle = _cycle_findings(graph)
        members = ", ".join(cycle[0].ids) if cycle else "?"
        raise PreconditionError(f"spec {spec.name} has a cycle through {members}")
