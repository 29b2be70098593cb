# src/edge_fabric/analysis/rates.py
"""Steady-state message rates and the modeled CPU demand they put on each site."""
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from edge_fabric.fabric.plan import PhysicalPlan
from edge_fabric.model.spec_model import LogicalSpec, topological_order


@dataclass(frozen=True)
class RateVector:
    """Per-node msgs/s in and out, and bytes/s out at declared message sizes."""
    msgs_in: Dict[str, float]
    msgs_out: Dict[str, float]
    bytes_out: Dict[str, float]

    def channel_msgs(self, edge: Tuple[str, str]) -> float:
        # Every successor receives the full output of its predecessor.
        return self.msgs_out[edge[0]]

    def channel_bytes(self, edge: Tuple[str, str]) -> float:
        return self.bytes_out[edge[0]]


def steady_rates(spec: LogicalSpec) -> RateVector:
    """
    Propagate source rates through the DAG in topological order.

    A node with several in-edges receives the sum of its predecessors' outputs.
    """
    msgs_in: Dict[str, float] = {}
    msgs_out: Dict[str, float] = {}
    bytes_out: Dict[str, float] = {}
    for node in topological_order(spec):
        role = spec.role_of(node)
        if role == "source":
            src = spec.source(node)
            msgs_in[node] = 0.0
            msgs_out[node] = float(src.rate)
            bytes_out[node] = float(src.rate) * src.bytes_per_msg
            continue
        inbound = float(sum(msgs_out[p] for p in spec.predecessors(node)))
        msgs_in[node] = inbound
        if role == "component":
            c = spec.component(node)
            msgs_out[node] = c.selectivity * inbound
            bytes_out[node] = msgs_out[node] * c.out_bytes_per_msg
        else:
            msgs_out[node] = 0.0
            bytes_out[node] = 0.0
    return RateVector(msgs_in, msgs_out, bytes_out)


def modeled_cpu(plan: PhysicalPlan, rates: RateVector,
                cpu_overrides: Optional[Mapping[str, float]] = None) -> Dict[str, Tuple[str, float]]:
    """
    (site, cpu-units/s) for every component, injected codec component and shadow of a plan.

    Demand is msgs_in × cpu_units_per_msg / speed_factor of the hosting site; cpu_overrides
    replaces the modeled figure for the entities it names.
    """
    overrides = cpu_overrides or {}
    topology = plan.topology
    demand: Dict[str, Tuple[str, float]] = {}
    for c in plan.spec.components:
        site = topology.site(plan.site_of(c.id))
        demand[c.id] = (site.id, rates.msgs_in[c.id] * c.cpu_units_per_msg / site.speed_factor)
    for cc in plan.injected:
        site = topology.site(cc.site_id)
        demand[cc.id] = (site.id, rates.channel_msgs(cc.edge) * cc.cpu_units_per_msg / site.speed_factor)
    for sh in plan.shadows:
        site = topology.site(sh.site_id)
        c = plan.spec.component(sh.component)
        demand[sh.id] = (site.id, rates.msgs_in[c.id] * c.cpu_units_per_msg / site.speed_factor)
    for entity_id, cpu in overrides.items():
        if entity_id in demand:
            demand[entity_id] = (demand[entity_id][0], cpu)
    return demand


def site_cpu_demand(plan: PhysicalPlan, rates: RateVector,
                    cpu_overrides: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    totals = {site.id: 0.0 for site in plan.topology.sites}
    for site_id, cpu in modeled_cpu(plan, rates, cpu_overrides).values():
        totals[site_id] += cpu
    return totals


def edge_cpu_utilization(plan: PhysicalPlan, rates: RateVector) -> Tuple[float, Dict[str, float]]:
    """Aggregate edge utilization (Σ demand / Σ capacity over edge sites) and the per-site fractions."""
    demand = site_cpu_demand(plan, rates)
    per_site = {}
    used = capacity = 0.0
    for site in plan.topology.edge_sites():
        used += demand[site.id]
        capacity += site.cpu_units
        per_site[site.id] = demand[site.id] / site.cpu_units if site.cpu_units > 0 else 0.0
    return (used / capacity if capacity > 0 else 0.0), per_site
