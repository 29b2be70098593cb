from edge_fabric.model.spec_model import (
    ComponentDecl, Finding, LogicalSpec, SinkDecl, SourceDecl, ValidationReport, parse_spec,
    serialize_spec, topological_order, validate,
)
from edge_fabric.model.topology import (
    BandwidthSchedule, LinkSpec, PricingTable, ProvisionedUnit, Site, Topology, bandwidth_at,
    edge_headroom, parse_topology, serialize_topology,
)
from edge_fabric.model.workload import (
    Record, SensorModel, SourceWorkload, WorkloadSpec, export_trace, generate, replay,
)
